#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace gscan {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Stateless:
// the output is a pure function of (counter, key).
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter counter, Key key) noexcept;
};

// Standard normal draws indexed by (seed, stream, position). Position i of a
// stream is always the same number no matter how the stream is consumed, so
// streams can be regenerated in any order or split across workers.
//
// Layout: block c = Philox(counter = {c_lo, c_hi, stream_lo, stream_hi},
// key = seed) gives two 64-bit uniforms and, via Box-Muller, the normals at
// positions 2c and 2c+1.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t stream) noexcept
      : seed_(seed), stream_(stream) {}

  double operator()() noexcept;

  void fill(std::span<double> out) noexcept;

  // Normal at an absolute position without touching the stream state.
  static double at(std::uint64_t seed, std::uint64_t stream,
                   std::uint64_t position) noexcept;

  static std::array<double, 2> block(std::uint64_t seed, std::uint64_t stream,
                                     std::uint64_t block_index) noexcept;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t next_block_ = 0;
  std::array<double, 2> buffer_{};
  int buffered_ = 0;
};

// SplitMix64 finalizer; used to derive sub-seeds from (seed, tag) pairs.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) noexcept;

}  // namespace gscan
