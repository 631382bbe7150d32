#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gscan/field.hpp"
#include "gscan/scan.hpp"
#include "gscan/theory.hpp"
#include "json.hpp"

namespace gscan {

// Replaces the Gaussian generator (tests use zero or fixed fields).
using FieldSource =
    std::function<GaussianLatticeField(const Extents& dims, std::uint64_t seed, std::uint64_t replication)>;

struct ExperimentConfig {
  // n is the lattice extent for discrete settings and the box side for
  // continuous ones; constants must already be resolved.
  SettingSpec setting;
  std::uint64_t replications = 100;
  std::uint64_t master_seed = 1;
  unsigned workers = 0;
  // Continuous settings are scanned on a lattice with this spacing.
  double grid_step = 0.1;
  // Side-length bounds h in the setting's units. Defaults: every discrete
  // window ({x, ..., x + h}, 0 <= h < n), or [a, n] for continuous settings.
  std::optional<double> side_lo;
  std::optional<double> side_hi;
  bool emit_samples = false;
  FieldSource field_source;
};

nlohmann::json to_json(const ExperimentConfig& cfg);
// Inverse of to_json for replay; constants and hooks are left unset.
ExperimentConfig config_from_json(const nlohmann::json& j);

// Lattice extents and window family a configuration scans.
struct ScanPlan {
  Extents dims;
  WindowFamily family;
};

ScanPlan plan_scan(const ExperimentConfig& cfg);

// Draws replication r's field: cfg.field_source, or i.i.d. N(0,1) from
// stream r of master_seed.
GaussianLatticeField replication_field(const ExperimentConfig& cfg, const Extents& dims,
                                       std::uint64_t r);

double gumbel_cdf(double x);

// sup_x |F_N(x) - cdf(x)| over the sample points.
double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf);

struct GumbelReport {
  std::vector<double> maxima;
  std::vector<double> tau_samples;
  double ks_distance = 0.0;
  // Smallest KS distance over shifts of every tau by at most tau_band.
  double ks_distance_band = 0.0;
  double tau_band = 0.0;
  std::vector<std::pair<double, double>> quantiles;  // (p, empirical quantile)
};

GumbelReport run_gumbel(const ExperimentConfig& cfg);

struct PoissonReport {
  std::vector<std::int64_t> counts;
  double lambda = 0.0;
  double lambda_error = 0.0;
  double mean = 0.0;
  double variance = 0.0;
  std::optional<double> dispersion;  // variance / mean, when mean > 0
  double mean_band = 0.0;            // 3 sqrt(lambda / reps)(1 + lambda) + lambda_error
  std::optional<double> chi_square;
  int chi_square_dof = 0;
  std::optional<double> p_value;
  double threshold = 0.0;
  std::int64_t blocks = 0;
  bool mean_ok = false;
  bool dispersion_ok = false;
};

// Compares integer counts against Poisson(lambda). Chi-square bins start at
// 0 and are merged until each expects at least 5; the last bin is a tail.
PoissonReport check_poisson(std::vector<std::int64_t> counts, double lambda, double lambda_error = 0.0);

// Counts, per replication, the cells of an i.i.d. N(0,1) lattice above u:
// binomial(cells, P[Z > u]) counts checked against Poisson(cells P[Z > u]).
PoissonReport run_independent_events(std::int64_t cells, double u, std::uint64_t replications,
                                     std::uint64_t seed, unsigned workers = 0);

// Block exceedance counts for windows with side h in [a, b] (times
// l_n = floor(log n) for discrete settings, on unit origin blocks for
// continuous ones). cfg.setting.profile_integral must be set for discrete
// cubes with d > 1.
PoissonReport run_poisson_clumps(const ExperimentConfig& cfg, double tau, double a, double b);

// max / sqrt(2 d log n) per replication.
std::vector<double> run_lln(const ExperimentConfig& cfg);

struct TailReport {
  std::uint64_t hits = 0;
  std::uint64_t replications = 0;
  double probability = 0.0;
  double standard_error = 0.0;
  double kappa = 0.0;
  double asymptotic = 0.0;
  double ratio = 0.0;
  double ratio_error = 0.0;
};

// Direct Monte Carlo of P[max over the region's q-grid windows > u] against
// tail_asymptotic_grid at kappa = q u^2. `node` evaluates E_d for cubes with
// d > 1. Throws DomainError for u < 2 and UnderpoweredError when fewer than
// 10 hits are expected.
TailReport run_tail_comparison(const ExperimentConfig& cfg, const TailRegion& region, double u,
                               double q, const WalkNode& node = {});

nlohmann::json to_json(const GumbelReport& r, bool samples);
nlohmann::json to_json(const PoissonReport& r, bool samples);
nlohmann::json to_json(const TailReport& r);

}  // namespace gscan
