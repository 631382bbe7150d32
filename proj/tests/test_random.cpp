#include <vector>

#include "doctest.h"
#include "gscan/random.hpp"

using namespace gscan;

TEST_CASE("philox known-answer vectors") {
  CHECK(Philox4x32::generate({0, 0, 0, 0}, {0, 0}) ==
        Philox4x32::Counter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::generate({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                             {0xffffffff, 0xffffffff}) ==
        Philox4x32::Counter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::generate({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                             {0xa4093822, 0x299f31d0}) ==
        Philox4x32::Counter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("normal stream positions are consumption independent") {
  NormalStream s(42, 3);
  std::vector<double> v(9);
  s.fill(v);
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(v[i] == NormalStream::at(42, 3, i));
  CHECK(NormalStream::at(42, 3, 0) != NormalStream::at(42, 4, 0));
  CHECK(NormalStream::at(42, 3, 0) != NormalStream::at(43, 3, 0));
}

TEST_CASE("mix_seed separates tags") {
  CHECK(mix_seed(1, 0) != mix_seed(1, 1));
  CHECK(mix_seed(1, 0) != mix_seed(2, 0));
  CHECK(mix_seed(5, 9) == mix_seed(5, 9));
}
