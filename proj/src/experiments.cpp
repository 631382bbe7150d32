#include "gscan/experiments.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <numeric>

#include "gscan/error.hpp"
#include "gscan/parallel.hpp"
#include "gscan/stats.hpp"

namespace gscan {

namespace {

constexpr double kSlack = 1e-9;

bool is_discrete(SettingFamily f) {
  return f == SettingFamily::DiscreteCube || f == SettingFamily::DiscreteRect ||
         f == SettingFamily::IID;
}

bool is_cube(SettingFamily f) {
  return f == SettingFamily::DiscreteCube || f == SettingFamily::ContinuousCube;
}

Index lattice_extent(const SettingSpec& s) {
  const double r = std::round(s.n);
  if (std::abs(r - s.n) > kSlack * s.n || r < 2.0)
    throw ConfigurationError("discrete settings need an integer n >= 2");
  return static_cast<Index>(r);
}

Index grid_cells(double length, double q) {
  const double cells = length / q;
  const double r = std::round(cells);
  if (std::abs(cells - r) > 1e-6 * std::max(1.0, cells))
    throw ConfigurationError("grid step must divide the box side");
  return static_cast<Index>(r);
}

void check_config(const ExperimentConfig& cfg) {
  validate(cfg.setting);
  if (cfg.replications < 1) throw ConfigurationError("replications must be at least 1");
  if (!is_discrete(cfg.setting.family) && !(cfg.grid_step > 0.0))
    throw ConfigurationError("grid step must be positive");
}

int rank_of(const SettingSpec& s) { return s.family == SettingFamily::IID ? 1 : s.d; }

std::size_t count_of(std::uint64_t reps) { return static_cast<std::size_t>(reps); }

}  // namespace

nlohmann::json to_json(const ExperimentConfig& cfg) {
  const auto& s = cfg.setting;
  nlohmann::json j = {
      {"setting", {{"family", to_string(s.family)}, {"d", s.d}, {"n", s.n}, {"a", s.a}}},
      {"replications", cfg.replications},
      {"master_seed", cfg.master_seed},
      {"grid_step", cfg.grid_step},
      {"emit_samples", cfg.emit_samples},
  };
  j["side_lo"] = cfg.side_lo ? nlohmann::json(*cfg.side_lo) : nlohmann::json(nullptr);
  j["side_hi"] = cfg.side_hi ? nlohmann::json(*cfg.side_hi) : nlohmann::json(nullptr);
  return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  try {
    const auto& s = j.at("setting");
    cfg.setting.family = parse_setting_family(s.at("family").get<std::string>());
    cfg.setting.d = s.at("d").get<int>();
    cfg.setting.n = s.at("n").get<double>();
    cfg.setting.a = s.value("a", 1.0);
    cfg.replications = j.value("replications", cfg.replications);
    cfg.master_seed = j.value("master_seed", cfg.master_seed);
    cfg.grid_step = j.value("grid_step", cfg.grid_step);
    cfg.emit_samples = j.value("emit_samples", false);
    if (j.contains("side_lo") && !j["side_lo"].is_null()) cfg.side_lo = j["side_lo"].get<double>();
    if (j.contains("side_hi") && !j["side_hi"].is_null()) cfg.side_hi = j["side_hi"].get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigurationError(std::string("bad experiment config: ") + e.what());
  }
  return cfg;
}

ScanPlan plan_scan(const ExperimentConfig& cfg) {
  check_config(cfg);
  const auto& s = cfg.setting;
  const auto d = static_cast<std::size_t>(rank_of(s));
  ScanPlan p;
  if (s.family == SettingFamily::IID) {
    const Index n = lattice_extent(s);
    p.dims = {n};
    p.family = WindowFamily::cubes(1, 1, 1);
    return p;
  }
  if (is_discrete(s.family)) {
    const Index n = lattice_extent(s);
    const double lo = cfg.side_lo.value_or(0.0);
    const double hi = cfg.side_hi.value_or(static_cast<double>(n - 1));
    if (lo < 0.0 || hi < lo) throw ConfigurationError("need 0 <= side_lo <= side_hi");
    const Index smin = static_cast<Index>(std::ceil(lo - kSlack)) + 1;
    const Index smax = std::min<Index>(static_cast<Index>(std::floor(hi + kSlack)) + 1, n);
    if (smin > smax) throw ConfigurationError("side range holds no window");
    p.dims = Extents(d, n);
    p.family = is_cube(s.family) ? WindowFamily::cubes(d, smin, smax)
                                 : WindowFamily::rects(Extents(d, smin), Extents(d, smax));
    return p;
  }
  const double q = cfg.grid_step;
  const Index cells = grid_cells(s.n, q);
  const double lo = cfg.side_lo.value_or(s.a);
  const double hi = cfg.side_hi.value_or(s.n);
  if (!(lo > 0.0) || hi < lo) throw ConfigurationError("need 0 < side_lo <= side_hi");
  p.dims = Extents(d, cells);
  p.family = is_cube(s.family) ? WindowFamily::grid_cubes(d, q, lo, hi)
                               : WindowFamily::grid_rects(d, q, lo, hi);
  resolve_sides(p.dims, p.family);
  return p;
}

GaussianLatticeField replication_field(const ExperimentConfig& cfg, const Extents& dims,
                                       std::uint64_t r) {
  if (cfg.field_source) return cfg.field_source(dims, cfg.master_seed, r);
  return generate_lattice(dims, cfg.master_seed, r);
}

double gumbel_cdf(double x) { return std::exp(-std::exp(-x)); }

double ks_distance(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw DomainError("KS distance needs at least one sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double dist = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    dist = std::max({dist, std::abs(static_cast<double>(i + 1) / n - f),
                     std::abs(static_cast<double>(i) / n - f)});
  }
  return dist;
}

GumbelReport run_gumbel(const ExperimentConfig& cfg) {
  const ScanPlan plan = plan_scan(cfg);
  GumbelReport rep;
  rep.maxima = parallel_map<double>(count_of(cfg.replications), cfg.workers, [&](std::size_t r) {
    const auto field = replication_field(cfg, plan.dims, r);
    return scan_family(build_prefix_table(field), plan.family).max_value;
  });
  rep.tau_samples.reserve(rep.maxima.size());
  for (double m : rep.maxima) rep.tau_samples.push_back(invert_normalizer(cfg.setting, m));
  rep.ks_distance = ks_distance(rep.tau_samples, gumbel_cdf);
  rep.tau_band = tau_band(cfg.setting);
  rep.ks_distance_band = rep.ks_distance;
  if (rep.tau_band > 0.0) {
    constexpr int kSteps = 100;
    for (int i = -kSteps; i <= kSteps; ++i) {
      const double shift = rep.tau_band * i / kSteps;
      rep.ks_distance_band = std::min(
          rep.ks_distance_band, ks_distance(rep.tau_samples, [shift](double x) { return gumbel_cdf(x + shift); }));
    }
  }
  std::vector<double> sorted = rep.tau_samples;
  std::sort(sorted.begin(), sorted.end());
  for (double p : {0.05, 0.25, 0.5, 0.75, 0.95}) rep.quantiles.emplace_back(p, quantile_sorted(sorted, p));
  return rep;
}

PoissonReport check_poisson(std::vector<std::int64_t> counts, double lambda, double lambda_error) {
  if (counts.empty()) throw DomainError("no counts");
  if (!(lambda >= 0.0)) throw DomainError("lambda must be non-negative");
  PoissonReport rep;
  rep.lambda = lambda;
  rep.lambda_error = lambda_error;
  std::vector<double> x(counts.begin(), counts.end());
  for (auto c : counts)
    if (c < 0) throw DomainError("counts must be non-negative");
  const auto s = summarize(x);
  const double reps = static_cast<double>(counts.size());
  rep.mean = s.mean;
  rep.variance = s.variance;
  if (s.mean > 0.0) rep.dispersion = s.variance / s.mean;
  rep.mean_band = 3.0 * std::sqrt(lambda / reps) * (1.0 + lambda) + lambda_error;
  rep.mean_ok = std::abs(rep.mean - lambda) <= rep.mean_band;
  rep.dispersion_ok = rep.dispersion && *rep.dispersion >= 0.75 && *rep.dispersion <= 1.25;

  if (lambda > 0.0) {
    // Pool k = 0, 1, ... into bins expecting at least 5; the last bin is k >= K.
    std::vector<double> expected;
    std::vector<std::int64_t> upper;  // inclusive upper k of each bin
    double acc = 0.0, pk = std::exp(-lambda), cum = 0.0;
    for (std::int64_t k = 0; 1.0 - cum > 0.0; ++k) {
      acc += reps * pk;
      cum += pk;
      if (acc >= 5.0) {
        expected.push_back(acc);
        upper.push_back(k);
        acc = 0.0;
      }
      pk *= lambda / static_cast<double>(k + 1);
      if (reps * (1.0 - cum) < 5.0) break;
    }
    if (!expected.empty()) {
      expected.back() += reps * std::max(0.0, 1.0 - cum) + acc;
      upper.back() = std::numeric_limits<std::int64_t>::max();
    }
    if (expected.size() >= 2) {
      std::vector<double> observed(expected.size(), 0.0);
      for (auto c : counts) {
        const auto it = std::lower_bound(upper.begin(), upper.end(), c);
        observed[static_cast<std::size_t>(it - upper.begin())] += 1.0;
      }
      double chi = 0.0;
      for (std::size_t i = 0; i < expected.size(); ++i)
        chi += (observed[i] - expected[i]) * (observed[i] - expected[i]) / expected[i];
      rep.chi_square = chi;
      rep.chi_square_dof = static_cast<int>(expected.size()) - 1;
      const boost::math::chi_squared_distribution<double> dist(rep.chi_square_dof);
      rep.p_value = boost::math::cdf(boost::math::complement(dist, chi));
    }
  }
  rep.counts = std::move(counts);
  return rep;
}

PoissonReport run_independent_events(std::int64_t cells, double u, std::uint64_t replications,
                                     std::uint64_t seed, unsigned workers) {
  if (cells < 1 || replications < 1) throw ConfigurationError("need cells, replications >= 1");
  auto counts = parallel_map<std::int64_t>(count_of(replications), workers, [&](std::size_t r) {
    const auto f = generate_lattice({cells}, seed, r);
    std::int64_t c = 0;
    for (double v : f.values()) c += v > u ? 1 : 0;
    return c;
  });
  auto rep = check_poisson(std::move(counts), static_cast<double>(cells) * normal_tail(u));
  rep.threshold = u;
  rep.blocks = cells;
  return rep;
}

PoissonReport run_poisson_clumps(const ExperimentConfig& cfg, double tau, double a, double b) {
  check_config(cfg);
  if (!(a > 0.0) || !(b > a)) throw DomainError("need 0 < a < b");
  const auto& s = cfg.setting;
  if (s.family == SettingFamily::IID) throw NotApplicable("clump counts need a scan setting");
  const auto d = static_cast<std::size_t>(s.d);
  Extents dims;
  WindowFamily family;
  Index block = 1;
  if (is_discrete(s.family)) {
    const Index n = lattice_extent(s);
    const double ln = std::floor(std::log(static_cast<double>(n)));
    if (ln < 1.0) throw ConfigurationError("n too small for log-scaled blocks");
    block = static_cast<Index>(ln);
    const Index smin = static_cast<Index>(std::ceil(a * ln - kSlack)) + 1;
    const Index smax = std::min<Index>(static_cast<Index>(std::floor(b * ln + kSlack)) + 1, n);
    if (smin > smax) throw ConfigurationError("side range holds no window");
    dims = Extents(d, n);
    family = is_cube(s.family) ? WindowFamily::cubes(d, smin, smax)
                               : WindowFamily::rects(Extents(d, smin), Extents(d, smax));
  } else {
    const double q = cfg.grid_step;
    dims = Extents(d, grid_cells(s.n, q));
    block = grid_cells(1.0, q);
    family = is_cube(s.family) ? WindowFamily::grid_cubes(d, q, a, b)
                               : WindowFamily::grid_rects(d, q, a, b);
  }
  resolve_sides(dims, family);
  const double u = normalizer(s, tau);
  const auto lam = clump_rate_estimate(s, tau, a, b);

  auto counts = parallel_map<std::int64_t>(count_of(cfg.replications), cfg.workers, [&](std::size_t r) {
    const auto field = replication_field(cfg, dims, r);
    const auto maxima = block_maxima(build_prefix_table(field), family, block);
    return static_cast<std::int64_t>(std::count_if(maxima.begin(), maxima.end(), [u](double m) { return m > u; }));
  });
  auto rep = check_poisson(std::move(counts), lam.value, lam.abs_error);
  rep.threshold = u;
  rep.blocks = 1;
  for (Index n : dims) rep.blocks *= (n + block - 1) / block;
  return rep;
}

std::vector<double> run_lln(const ExperimentConfig& cfg) {
  const ScanPlan plan = plan_scan(cfg);
  const double scale = std::sqrt(2.0 * rank_of(cfg.setting) * std::log(cfg.setting.n));
  return parallel_map<double>(count_of(cfg.replications), cfg.workers, [&](std::size_t r) {
    const auto field = replication_field(cfg, plan.dims, r);
    return scan_family(build_prefix_table(field), plan.family).max_value / scale;
  });
}

TailReport run_tail_comparison(const ExperimentConfig& cfg, const TailRegion& region, double u,
                               double q, const WalkNode& node) {
  if (cfg.replications < 1) throw ConfigurationError("replications must be at least 1");
  if (!(u >= 2.0)) throw DomainError("tail comparison needs u >= 2");
  if (!(q > 0.0)) throw DomainError("grid step must be positive");
  const auto fam = cfg.setting.family;
  const int d = cfg.setting.d;
  TailReport rep;
  rep.replications = cfg.replications;
  rep.kappa = q * u * u;
  rep.asymptotic = tail_asymptotic_grid(fam, region, u, rep.kappa, d, node);
  if (static_cast<double>(cfg.replications) * rep.asymptotic < 10.0)
    throw UnderpoweredError("fewer than 10 exceedances expected; raise replications");

  const auto dd = static_cast<std::size_t>(d);
  Extents dims(dd), smin(dd), smax(dd);
  OriginBox box{Extents(dd, 0), Extents(dd)};
  for (std::size_t i = 0; i < dd; ++i) {
    const auto& x = region.origin[i];
    const auto& h = fam == SettingFamily::ContinuousCube ? region.length.front() : region.length[i];
    const Index o_lo = static_cast<Index>(std::ceil(x.lo / q - kSlack));
    const Index o_hi = static_cast<Index>(std::floor(x.hi / q + kSlack));
    smin[i] = std::max<Index>(1, static_cast<Index>(std::ceil(h.lo / q - kSlack)));
    smax[i] = static_cast<Index>(std::floor(h.hi / q + kSlack));
    if (o_hi < o_lo || smax[i] < smin[i]) throw DomainError("region holds no grid window");
    box.hi[i] = o_hi - o_lo;
    dims[i] = box.hi[i] + smax[i];
  }
  WindowFamily family{fam == SettingFamily::ContinuousCube ? FamilyKind::GridCube : FamilyKind::GridRect,
                      smin, smax, q};
  auto hit = parallel_map<char>(count_of(cfg.replications), cfg.workers, [&](std::size_t r) {
    const auto field = replication_field(cfg, dims, r);
    return static_cast<char>(scan_family(build_prefix_table(field), family, box).max_value > u);
  });
  rep.hits = static_cast<std::uint64_t>(std::count(hit.begin(), hit.end(), 1));
  const double reps = static_cast<double>(cfg.replications);
  rep.probability = static_cast<double>(rep.hits) / reps;
  rep.standard_error = std::sqrt(rep.probability * (1.0 - rep.probability) / reps);
  rep.ratio = rep.probability / rep.asymptotic;
  rep.ratio_error = rep.standard_error / rep.asymptotic;
  return rep;
}

namespace {

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json to_json(const GumbelReport& r, bool samples) {
  nlohmann::json q = nlohmann::json::array();
  for (const auto& [p, v] : r.quantiles)
    q.push_back({{"p", p}, {"empirical", v}, {"gumbel", -std::log(-std::log(p))}});
  nlohmann::json j = {{"ks_distance", r.ks_distance},
                      {"ks_distance_band", r.ks_distance_band},
                      {"tau_band", r.tau_band},
                      {"replications", r.tau_samples.size()},
                      {"quantiles", q}};
  if (samples) {
    j["tau_samples"] = r.tau_samples;
    j["maxima"] = r.maxima;
  }
  return j;
}

nlohmann::json to_json(const PoissonReport& r, bool samples) {
  nlohmann::json j = {{"lambda", r.lambda},
                      {"lambda_error", r.lambda_error},
                      {"mean", r.mean},
                      {"variance", r.variance},
                      {"dispersion", optional_json(r.dispersion)},
                      {"mean_band", r.mean_band},
                      {"chi_square", optional_json(r.chi_square)},
                      {"chi_square_dof", r.chi_square_dof},
                      {"p_value", optional_json(r.p_value)},
                      {"threshold", r.threshold},
                      {"blocks", r.blocks},
                      {"replications", r.counts.size()},
                      {"mean_ok", r.mean_ok},
                      {"dispersion_ok", r.dispersion_ok}};
  if (samples) j["counts"] = r.counts;
  return j;
}

nlohmann::json to_json(const TailReport& r) {
  return {{"hits", r.hits},
          {"replications", r.replications},
          {"probability", r.probability},
          {"standard_error", r.standard_error},
          {"kappa", r.kappa},
          {"asymptotic", r.asymptotic},
          {"ratio", r.ratio},
          {"ratio_error", r.ratio_error}};
}

}  // namespace gscan
