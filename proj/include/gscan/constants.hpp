#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

namespace gscan {

enum class EstimateMethod { Series, Quadrature, MonteCarlo, Extrapolation };

std::string to_string(EstimateMethod m);

struct ConstantEstimate {
  double value = 0.0;
  double abs_error = 0.0;
  EstimateMethod method = EstimateMethod::Series;
  nlohmann::json params = nlohmann::json::object();
};

// Upper normal tail P(Z > x), via erfc.
double normal_tail(double x);

// F(kappa) = (1/kappa) exp(-2 sum_n Phi-bar(sqrt(kappa n)/2) / n).
// The series stops once sum_{n>N} e^{-kappa n/8}/n < tol/2.
ConstantEstimate pickands_F(double kappa, double tol = 1e-12);

// G(h; kappa) = F(kappa/h)^2 / h^2.
double G_of(double h, double kappa);

// G_d = integral over h > 0 of G(h; 2d).
ConstantEstimate integrate_G_d(int d, double tol = 1e-9);

// Integral of G(h; kappa) over h in [a, b]; b may be +inf.
ConstantEstimate integrate_G_range(double kappa, double a, double b, double tol = 1e-9);

// Integral of G(h; 2d) over h in [a, b]; b may be +inf.
ConstantEstimate integrate_G_d_range(int d, double a, double b, double tol = 1e-9);

enum class WalkEstimator {
  // max_L e^Y / (kappa^{d+1} sum_L e^Y) over the two-sided lattice
  // L = (kappa Z)^{d+1} cut to [-T, T]^{d+1}. Bounded by kappa^{-(d+1)}.
  SumNormalized,
  // e^{max Y} / T^{d+1} over [0, T]^{d+1}: the defining expression read
  // literally. Converges very slowly in T.
  WindowMax,
};

std::string to_string(WalkEstimator e);

struct McParams {
  std::uint64_t replications = 10000;
  std::uint64_t seed = 1;
  unsigned workers = 0;
  // Truncation width used when T is chosen automatically.
  double half_width = 64.0;
  WalkEstimator estimator = WalkEstimator::SumNormalized;
};

// Random walk on kappa Z started at 0 with N(-kappa/2, kappa) steps:
// out[j] = value after j steps, out.size() == steps + 1.
std::vector<double> sample_walk(double kappa, std::int64_t steps,
                                std::uint64_t seed, std::uint64_t stream);

// Monte Carlo estimate of E_d(kappa) at truncation T (a multiple of kappa).
// The same walks also give the estimate at T/2; their difference is added to
// the standard error in abs_error.
ConstantEstimate estimate_E_d_grid(int d, double kappa, double T,
                                   const McParams& mc);

// estimate_E_d_grid at an aligned T near mc.half_width, with the seed
// derived from (mc.seed, d, kappa) so the same node always gets the same
// draws.
ConstantEstimate estimate_E_d_node(int d, double kappa, const McParams& mc);

// J_d(h) = h^{-(d+1)} E_d(2d/h).
ConstantEstimate J_d_of(double h, int d, const McParams& mc);

struct Extrapolation {
  ConstantEstimate limit;
  double log_slope = 0.0;  // c in log E_d(kappa) = log E_d + c sqrt(kappa)
  double log_slope_error = 0.0;
  double chi2_per_dof = 0.0;
  std::vector<double> kappas;
  std::vector<ConstantEstimate> nodes;
  std::vector<double> pulls;  // (node - fit) / node error
};

// Fits log E_d(kappa) = log E_d + c sqrt(kappa) by weighted least squares.
// abs_error = fit standard error (inflated when chi2/dof > 1) plus a model
// term: the larger shift of the limit from dropping the largest kappa or
// (with 4+ nodes) from adding a kappa term to the fit.
Extrapolation extrapolate_E_d(std::vector<double> kappas,
                              std::vector<ConstantEstimate> nodes);

// E_d = lim E_d(kappa) as kappa -> 0, from estimates along `kappas`
// (at least 3 values).
Extrapolation estimate_E_d_continuous(int d, std::vector<double> kappas,
                                      const McParams& mc);

struct QuadParams {
  double k_min = 1.0 / 16.0;
  double k_max = 256.0;
  int nodes_per_octave = 4;
  int fit_nodes = 4;
};

using WalkNode = std::function<ConstantEstimate(double kappa)>;

struct JdIntegral {
  ConstantEstimate total;
  Extrapolation small_kappa;  // fit over the smallest nodes, gives E_d
  double body = 0.0;
  double small_kappa_tail = 0.0;  // large-h part
  double large_kappa_tail = 0.0;  // small-h part
  double mc_error = 0.0;
  double quadrature_residual = 0.0;
  double tail_error = 0.0;
};

// J_d = integral of J_d(h) over h > 0, written in kappa = 2d/h as
// (2d)^{-d} integral of kappa^d E_d(kappa) d(log kappa). Simpson on a log
// grid over [k_min, k_max]; the large-h tail comes from the small-kappa fit
// and the small-h tail from E_d(kappa) ~ kappa^{-(d+1)}.
JdIntegral integrate_J_d(int d, const McParams& mc, const QuadParams& quad = {});

// Same with a caller-supplied node evaluator (tests feed exact values).
JdIntegral integrate_J_d(int d, const WalkNode& node, const QuadParams& quad);

// Integral of J_d(h; kappa) = h^{-(d+1)} E_d(kappa/h) over h in [a, b],
// 0 < a < b < inf, by Simpson in log(kappa/h) with at least
// `nodes_per_octave` nodes per octave. `node` evaluates E_d.
ConstantEstimate integrate_J_range(int d, double kappa, double a, double b,
                                   const WalkNode& node, int nodes_per_octave = 4);

// integrate_J_range with kappa = 2d.
ConstantEstimate integrate_J_d_range(int d, double a, double b,
                                     const WalkNode& node,
                                     int nodes_per_octave = 4);

ConstantEstimate integrate_J_d_range(int d, double a, double b,
                                     const McParams& mc,
                                     int nodes_per_octave = 4);

}  // namespace gscan
