#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace gscan::detail {

struct WalkSetup {
  int d = 1;
  double kappa = 1.0;
  std::int64_t m = 0;   // lattice half-width in steps
  std::int64_t mh = 0;  // inner half-width in steps
  double T = 1.0;
  double T_inner = 1.0;
  std::uint64_t seed = 0;
};

struct RepValue {
  double full = 0.0;
  double inner = 0.0;
};

// Per axis: V on {-m..m} at v[0..2m], W on {-2m..2m} at w[0..4m], both 0 at
// the center, d axes back to back. Draw order per axis: V right, V left,
// W right, W left.
void make_walks(const WalkSetup& s, std::uint64_t rep, std::vector<double>& v,
                std::vector<double>& w);

RepValue sum_normalized_rep(const WalkSetup& s, std::uint64_t rep);
RepValue window_max_rep(const WalkSetup& s, std::uint64_t rep);

// max over k in [k_lo, k_hi] of sum_i max over j in [j_lo, j_hi] of
// v_i[j] + w_i[j + k]. Exact.
double max_plus(std::span<const double* const> v, std::span<const double* const> w,
                std::int64_t j_lo, std::int64_t j_hi, std::int64_t k_lo,
                std::int64_t k_hi);

// Same by direct enumeration.
double max_plus_direct(std::span<const double* const> v,
                       std::span<const double* const> w, std::int64_t j_lo,
                       std::int64_t j_hi, std::int64_t k_lo, std::int64_t k_hi);

// c[k] = sum_j a[j] b[j + k] for k in [0, out.size()), via FFT.
// Requires a.size() + out.size() - 1 <= b.size().
void correlate(std::span<const double> a, std::span<const double> b,
               std::span<double> out);

}  // namespace gscan::detail
