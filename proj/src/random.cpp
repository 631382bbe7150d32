#include "gscan/random.hpp"

#include <cmath>
#include <numbers>

namespace gscan {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) noexcept {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

// Uniform on the open interval (0, 1) from the top 53 bits.
inline double open_uniform(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

Philox4x32::Counter Philox4x32::generate(Counter ctr, Key key) noexcept {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

std::array<double, 2> NormalStream::block(std::uint64_t seed,
                                          std::uint64_t stream,
                                          std::uint64_t block_index) noexcept {
  const Philox4x32::Counter ctr = {
      static_cast<std::uint32_t>(block_index),
      static_cast<std::uint32_t>(block_index >> 32),
      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  const Philox4x32::Key key = {static_cast<std::uint32_t>(seed),
                               static_cast<std::uint32_t>(seed >> 32)};
  const auto r = Philox4x32::generate(ctr, key);
  const std::uint64_t b1 = (static_cast<std::uint64_t>(r[1]) << 32) | r[0];
  const std::uint64_t b2 = (static_cast<std::uint64_t>(r[3]) << 32) | r[2];
  const double radius = std::sqrt(-2.0 * std::log(open_uniform(b1)));
  const double angle = 2.0 * std::numbers::pi * open_uniform(b2);
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

double NormalStream::operator()() noexcept {
  if (buffered_ == 0) {
    buffer_ = block(seed_, stream_, next_block_++);
    buffered_ = 2;
  }
  return buffer_[2 - buffered_--];
}

void NormalStream::fill(std::span<double> out) noexcept {
  for (double& v : out) v = (*this)();
}

double NormalStream::at(std::uint64_t seed, std::uint64_t stream,
                        std::uint64_t position) noexcept {
  return block(seed, stream, position / 2)[position % 2];
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) noexcept {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (tag + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace gscan
