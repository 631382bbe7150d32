#include "gscan/constants.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/special_functions/zeta.hpp>

#include "gscan/error.hpp"
#include "gscan/parallel.hpp"
#include "gscan/quadrature.hpp"
#include "gscan/random.hpp"
#include "gscan/stats.hpp"
#include "walk_kernels.hpp"

namespace gscan {

std::string to_string(EstimateMethod m) {
  switch (m) {
    case EstimateMethod::Series: return "Series";
    case EstimateMethod::Quadrature: return "Quadrature";
    case EstimateMethod::MonteCarlo: return "MonteCarlo";
    case EstimateMethod::Extrapolation: return "Extrapolation";
  }
  return "?";
}

std::string to_string(WalkEstimator e) {
  return e == WalkEstimator::SumNormalized ? "sum_normalized" : "window_max";
}

double normal_tail(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

namespace {

void require_kappa(double kappa) {
  if (!(kappa > 0.0) || !std::isfinite(kappa))
    throw DomainError("kappa must be positive and finite");
}

void require_dim(int d) {
  if (d < 1) throw InvalidDimension("dimension must be at least 1");
}

}  // namespace

ConstantEstimate pickands_F(double kappa, double tol) {
  require_kappa(kappa);
  if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
  const double one_minus_q = -std::expm1(-kappa / 8.0);
  // Neumaier-compensated running sum.
  double sum = 0.0, comp = 0.0, bound = 0.0;
  std::int64_t n = 0;
  while (true) {
    ++n;
    const double term = normal_tail(0.5 * std::sqrt(kappa * static_cast<double>(n))) /
                        static_cast<double>(n);
    const double t = sum + term;
    comp += std::abs(sum) >= std::abs(term) ? (sum - t) + term : (term - t) + sum;
    sum = t;
    const double next = static_cast<double>(n + 1);
    bound = std::exp(-kappa * next / 8.0) / (next * one_minus_q);
    if (bound < 0.5 * tol) break;
  }
  const double s = sum + comp;
  ConstantEstimate out;
  out.value = std::exp(-2.0 * s) / kappa;
  out.abs_error = out.value * (-std::expm1(-2.0 * bound)) +
                  4.0 * std::numeric_limits<double>::epsilon() * out.value * (1.0 + 2.0 * s);
  out.method = EstimateMethod::Series;
  out.params = {{"kappa", kappa}, {"tol", tol}, {"terms", n}, {"tail_bound", bound}};
  return out;
}

double G_of(double h, double kappa) {
  if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("h must be positive and finite");
  require_kappa(kappa);
  const double f = pickands_F(kappa / h, 1e-12).value;
  return f * f / (h * h);
}

namespace {

// F(kappa)^2 = exp(-2 rho sqrt(kappa)) / 4 + O(kappa^{3/2}) as kappa -> 0,
// rho = -zeta(1/2)/sqrt(2 pi). The O term is below 2e-3 kappa^{3/2} for
// kappa <= 1e-2.
constexpr double kSmallKappa = 1e-3;
// Above this F(kappa) = 1/kappa to double precision.
constexpr double kLargeKappa = 400.0;

double small_kappa_rho() {
  static const double rho =
      -boost::math::zeta(0.5) / std::sqrt(2.0 * std::numbers::pi);
  return rho;
}

struct Piece {
  double value = 0.0;
  double error = 0.0;
  std::size_t evaluations = 0;
};

// Integral of F(kappa s)^2 ds over [lo, hi], hi possibly +inf.
Piece integrate_F2(double kappa, double lo, double hi, double tol) {
  const double s_small = kSmallKappa / kappa;
  const double s_large = kLargeKappa / kappa;
  Piece out;

  if (lo < s_small) {
    const double b = std::min(hi, s_small);
    const double a = 2.0 * small_kappa_rho() * std::sqrt(kappa);
    auto model = [a](double s) {
      const double u = a * std::sqrt(s);
      return 0.5 / (a * a) * (1.0 - std::exp(-u) * (1.0 + u));
    };
    out.value += model(b) - model(lo);
    out.error += (b - lo) * 2e-3 * std::pow(kSmallKappa, 1.5);
  }

  const double mid_lo = std::max(lo, s_small);
  const double mid_hi = std::min(hi, s_large);
  if (mid_lo < mid_hi) {
    auto f = [kappa](double t) {
      const double F = pickands_F(kappa * t * t, 1e-12).value;
      return 2.0 * t * F * F;
    };
    const auto q = adaptive_simpson(f, std::sqrt(mid_lo), std::sqrt(mid_hi), 0.25 * tol);
    out.value += q.value;
    out.error += q.error;
    out.evaluations += q.evaluations;
  }

  if (hi > s_large) {
    const double a = std::max(lo, s_large);
    const double inv_hi = std::isinf(hi) ? 0.0 : 1.0 / hi;
    out.value += (1.0 / a - inv_hi) / (kappa * kappa);
  }
  return out;
}

}  // namespace

ConstantEstimate integrate_G_range(double kappa, double a, double b, double tol) {
  require_kappa(kappa);
  if (!(a > 0.0) || !(b > a)) throw DomainError("need 0 < a < b");
  if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
  const double lo = std::isinf(b) ? 0.0 : 1.0 / b;
  const Piece p = integrate_F2(kappa, lo, 1.0 / a, tol);
  ConstantEstimate out;
  out.value = p.value;
  out.abs_error = p.error;
  out.method = EstimateMethod::Quadrature;
  out.params = {{"kappa", kappa}, {"a", a}, {"tol", tol}, {"evaluations", p.evaluations}};
  out.params["b"] = std::isinf(b) ? nlohmann::json("inf") : nlohmann::json(b);
  return out;
}

ConstantEstimate integrate_G_d_range(int d, double a, double b, double tol) {
  require_dim(d);
  auto out = integrate_G_range(2.0 * d, a, b, tol);
  out.params["d"] = d;
  return out;
}

ConstantEstimate integrate_G_d(int d, double tol) {
  require_dim(d);
  if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
  const Piece p = integrate_F2(2.0 * d, 0.0, std::numeric_limits<double>::infinity(), tol);
  ConstantEstimate out;
  out.value = p.value;
  out.abs_error = p.error;
  out.method = EstimateMethod::Quadrature;
  out.params = {{"d", d}, {"tol", tol}, {"evaluations", p.evaluations}};
  return out;
}

// ---------------------------------------------------------------------------
// Random-walk functional E_d(kappa)

std::vector<double> sample_walk(double kappa, std::int64_t steps,
                                std::uint64_t seed, std::uint64_t stream) {
  require_kappa(kappa);
  if (steps < 0) throw DomainError("step count must be non-negative");
  NormalStream ns(seed, stream);
  const double mu = -0.5 * kappa, sd = std::sqrt(kappa);
  std::vector<double> out(static_cast<std::size_t>(steps) + 1, 0.0);
  for (std::size_t j = 1; j < out.size(); ++j) out[j] = out[j - 1] + mu + sd * ns();
  return out;
}

namespace {

using detail::RepValue;
using detail::WalkSetup;

constexpr std::int64_t kMaxWalkSteps = 1 << 20;

}  // namespace

ConstantEstimate estimate_E_d_grid(int d, double kappa, double T, const McParams& mc) {
  require_dim(d);
  require_kappa(kappa);
  if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("T must be positive and finite");
  if (mc.replications < 1) throw DomainError("need at least one replication");

  WalkSetup s{d, kappa, 0, 0, T, T, mc.seed};
  if (kappa <= T) {
    const double ratio = T / kappa;
    const double r = std::round(ratio);
    if (std::abs(ratio - r) > 1e-9 * ratio)
      throw AlignmentError("T must be a multiple of kappa");
    if (r > static_cast<double>(kMaxWalkSteps))
      throw OversizeError("T/kappa exceeds 2^20 steps");
    s.m = static_cast<std::int64_t>(r);
  }
  const bool halves = s.m >= 2;
  s.mh = halves ? s.m / 2 : s.m;
  s.T_inner = halves ? static_cast<double>(s.mh) * kappa : T;

  auto reps = parallel_map<RepValue>(mc.replications, mc.workers, [&](std::size_t r) {
    return mc.estimator == WalkEstimator::SumNormalized ? detail::sum_normalized_rep(s, r)
                                                        : detail::window_max_rep(s, r);
  });
  std::vector<double> full(reps.size()), inner(reps.size());
  for (std::size_t i = 0; i < reps.size(); ++i) {
    full[i] = reps[i].full;
    inner[i] = reps[i].inner;
  }
  const SampleSummary sf = summarize(full);
  const double shift = halves ? std::abs(sf.mean - summarize(inner).mean) : 0.0;

  ConstantEstimate out;
  out.value = sf.mean;
  out.abs_error = sf.standard_error + shift;
  out.method = EstimateMethod::MonteCarlo;
  out.params = {{"d", d},
                {"kappa", kappa},
                {"T", T},
                {"T_inner", s.T_inner},
                {"replications", mc.replications},
                {"seed", mc.seed},
                {"estimator", to_string(mc.estimator)},
                {"standard_error", sf.standard_error},
                {"truncation_shift", shift}};
  return out;
}

ConstantEstimate estimate_E_d_node(int d, double kappa, const McParams& mc) {
  require_dim(d);
  require_kappa(kappa);
  if (!(mc.half_width > 0.0)) throw DomainError("half_width must be positive");
  const double steps = std::max(2.0, 2.0 * std::ceil(mc.half_width / (2.0 * kappa)));
  McParams node = mc;
  node.seed = mix_seed(mix_seed(mc.seed, static_cast<std::uint64_t>(d)),
                       std::bit_cast<std::uint64_t>(kappa));
  auto est = estimate_E_d_grid(d, kappa, steps * kappa, node);
  est.params["base_seed"] = mc.seed;
  return est;
}

ConstantEstimate J_d_of(double h, int d, const McParams& mc) {
  if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("h must be positive and finite");
  auto e = estimate_E_d_node(d, 2.0 * d / h, mc);
  const double scale = std::pow(h, -(d + 1));
  e.value *= scale;
  e.abs_error *= scale;
  e.params["h"] = h;
  return e;
}

// ---------------------------------------------------------------------------
// kappa -> 0 limit

namespace {

struct LineFit {
  double a = 0.0, c = 0.0, var_a = 0.0, var_c = 0.0, chi2 = 0.0;
};

LineFit weighted_line(const std::vector<double>& x, const std::vector<double>& y,
                      const std::vector<double>& sigma, std::size_t n) {
  double S = 0, Sx = 0, Sxx = 0, Sy = 0, Sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = 1.0 / (sigma[i] * sigma[i]);
    S += w;
    Sx += w * x[i];
    Sxx += w * x[i] * x[i];
    Sy += w * y[i];
    Sxy += w * x[i] * y[i];
  }
  const double det = S * Sxx - Sx * Sx;
  LineFit f;
  f.a = (Sxx * Sy - Sx * Sxy) / det;
  f.c = (S * Sxy - Sx * Sy) / det;
  f.var_a = Sxx / det;
  f.var_c = S / det;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = (y[i] - f.a - f.c * x[i]) / sigma[i];
    f.chi2 += r * r;
  }
  return f;
}

// Intercept of the weighted fit y = a + c x + b x^2.
double weighted_quadratic_intercept(const std::vector<double>& x,
                                    const std::vector<double>& y,
                                    const std::vector<double>& sigma) {
  double m[3][4] = {};
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = 1.0 / (sigma[i] * sigma[i]);
    const double basis[3] = {1.0, x[i], x[i] * x[i]};
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) m[r][c] += w * basis[r] * basis[c];
      m[r][3] += w * basis[r] * y[i];
    }
  }
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
    std::swap(m[col], m[piv]);
    for (int r = 0; r < 3; ++r) {
      if (r == col) continue;
      const double f = m[r][col] / m[col][col];
      for (int c = col; c < 4; ++c) m[r][c] -= f * m[col][c];
    }
  }
  return m[0][3] / m[0][0];
}

}  // namespace

Extrapolation extrapolate_E_d(std::vector<double> kappas,
                              std::vector<ConstantEstimate> nodes) {
  if (kappas.size() != nodes.size()) throw DomainError("kappa/estimate count mismatch");
  if (kappas.size() < 3) throw DomainError("extrapolation needs at least 3 kappa values");
  std::vector<std::size_t> order(kappas.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return kappas[a] < kappas[b]; });
  Extrapolation out;
  for (std::size_t i : order) {
    require_kappa(kappas[i]);
    if (!(nodes[i].value > 0.0)) throw DomainError("estimates must be positive");
    out.kappas.push_back(kappas[i]);
    out.nodes.push_back(nodes[i]);
  }
  for (std::size_t i = 1; i < out.kappas.size(); ++i)
    if (out.kappas[i] == out.kappas[i - 1]) throw DomainError("kappa values must be distinct");

  const std::size_t n = out.kappas.size();
  std::vector<double> x(n), y(n), sigma(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = std::sqrt(out.kappas[i]);
    y[i] = std::log(out.nodes[i].value);
    sigma[i] = std::max(out.nodes[i].abs_error / out.nodes[i].value, 1e-12);
  }
  const LineFit fit = weighted_line(x, y, sigma, n);
  const double dof = static_cast<double>(n - 2);
  out.chi2_per_dof = fit.chi2 / dof;
  const double inflate = std::max(1.0, out.chi2_per_dof);
  const double value = std::exp(fit.a);
  const LineFit dropped = weighted_line(x, y, sigma, n - 1);

  out.log_slope = fit.c;
  out.log_slope_error = std::sqrt(fit.var_c * inflate);
  for (std::size_t i = 0; i < n; ++i)
    out.pulls.push_back((y[i] - fit.a - fit.c * x[i]) / sigma[i]);
  out.limit.value = value;
  // Model error: the larger of the shift from dropping the coarsest node
  // and the shift from adding a kappa term.
  double model = std::abs(value - std::exp(dropped.a));
  if (n >= 4) model = std::max(model, std::abs(value - std::exp(weighted_quadratic_intercept(x, y, sigma))));
  out.limit.abs_error = value * std::sqrt(fit.var_a * inflate) + model;
  out.limit.method = EstimateMethod::Extrapolation;
  out.limit.params = {{"model", "log E = log E0 + c sqrt(kappa)"},
                      {"kappas", out.kappas},
                      {"log_slope", fit.c},
                      {"chi2_per_dof", out.chi2_per_dof}};
  return out;
}

Extrapolation estimate_E_d_continuous(int d, std::vector<double> kappas,
                                      const McParams& mc) {
  require_dim(d);
  if (kappas.size() < 3) throw DomainError("extrapolation needs at least 3 kappa values");
  std::vector<ConstantEstimate> nodes;
  for (double k : kappas) nodes.push_back(estimate_E_d_node(d, k, mc));
  auto out = extrapolate_E_d(std::move(kappas), std::move(nodes));
  out.limit.params["d"] = d;
  out.limit.params["replications"] = mc.replications;
  out.limit.params["seed"] = mc.seed;
  out.limit.params["half_width"] = mc.half_width;
  return out;
}

// ---------------------------------------------------------------------------
// J_d

namespace {

double node_standard_error(const ConstantEstimate& e) {
  if (e.params.contains("standard_error")) return e.params["standard_error"].get<double>();
  return e.abs_error;
}

struct SimpsonSum {
  double fine = 0.0, coarse = 0.0, var = 0.0, bias = 0.0;
};

// Simpson over nodes phi_j = k_j^d E_j on a uniform log grid with spacing
// `du`; `intervals` is a multiple of 4 so the every-other-node rule is also
// Simpson.
SimpsonSum log_simpson(int d, const std::vector<double>& ks,
                       const std::vector<ConstantEstimate>& es, double du) {
  const std::size_t n = ks.size() - 1;
  SimpsonSum out;
  for (std::size_t j = 0; j <= n; ++j) {
    const double kd = std::pow(ks[j], d);
    const double phi = kd * es[j].value;
    const double c = (j == 0 || j == n) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
    const double w = du / 3.0 * c;
    out.fine += w * phi;
    const double se = node_standard_error(es[j]);
    out.var += (w * kd * se) * (w * kd * se);
    out.bias += w * kd * std::max(0.0, es[j].abs_error - se);
    if (j % 2 == 0) {
      const std::size_t jj = j / 2, nn = n / 2;
      const double cc = (jj == 0 || jj == nn) ? 1.0 : (jj % 2 == 1 ? 4.0 : 2.0);
      out.coarse += 2.0 * du / 3.0 * cc * phi;
    }
  }
  return out;
}

std::int64_t intervals_for(double octaves, int per_octave) {
  auto n = static_cast<std::int64_t>(std::ceil(octaves * per_octave - 1e-9));
  n = std::max<std::int64_t>(n, 4);
  return (n + 3) / 4 * 4;
}

}  // namespace

JdIntegral integrate_J_d(int d, const WalkNode& node, const QuadParams& quad) {
  require_dim(d);
  if (!(quad.k_min > 0.0) || !(quad.k_max > quad.k_min))
    throw DomainError("need 0 < k_min < k_max");
  if (quad.nodes_per_octave < 1) throw DomainError("nodes_per_octave must be positive");
  if (quad.fit_nodes < 3) throw DomainError("fit_nodes must be at least 3");

  const std::int64_t intervals =
      intervals_for(std::log2(quad.k_max / quad.k_min), quad.nodes_per_octave);
  if (quad.fit_nodes > intervals + 1) throw DomainError("fit_nodes exceeds the grid");
  std::vector<double> ks;
  std::vector<ConstantEstimate> es;
  for (std::int64_t j = 0; j <= intervals; ++j) {
    ks.push_back(quad.k_min *
                 std::exp2(static_cast<double>(j) / quad.nodes_per_octave));
    es.push_back(node(ks.back()));
  }
  const double k_top = ks.back();
  const double norm = std::pow(2.0 * d, -d);
  const double du = std::numbers::ln2 / quad.nodes_per_octave;
  const SimpsonSum s = log_simpson(d, ks, es, du);

  JdIntegral out;
  out.body = norm * s.fine;
  out.mc_error = norm * (std::sqrt(s.var) + s.bias);
  out.quadrature_residual = norm * std::abs(s.fine - s.coarse);

  const auto fit_n = static_cast<std::size_t>(quad.fit_nodes);
  out.small_kappa = extrapolate_E_d({ks.begin(), ks.begin() + fit_n},
                                    {es.begin(), es.begin() + fit_n});
  const double E0 = out.small_kappa.limit.value;
  const double c = out.small_kappa.log_slope;
  // Integral over (0, k_min) of k^{d-1} E0 exp(c sqrt k) dk, with k = u^2.
  auto tail_f = [&](double u) { return 2.0 * std::pow(u, 2 * d - 1) * E0 * std::exp(c * u); };
  const double root = std::sqrt(quad.k_min);
  const double tail = adaptive_simpson(tail_f, 0.0, root, 1e-14).value;
  const double flat = E0 * std::pow(quad.k_min, d) / d;
  out.small_kappa_tail = norm * tail;
  out.large_kappa_tail = norm / k_top;
  out.tail_error =
      norm * (tail * (out.small_kappa.limit.abs_error / E0 +
                      out.small_kappa.log_slope_error * root) +
              0.1 * std::abs(tail - flat));

  out.total.value = out.body + out.small_kappa_tail + out.large_kappa_tail;
  out.total.abs_error = out.mc_error + out.quadrature_residual + out.tail_error;
  out.total.method = EstimateMethod::Quadrature;
  out.total.params = {{"d", d},
                      {"k_min", quad.k_min},
                      {"k_max", k_top},
                      {"nodes_per_octave", quad.nodes_per_octave},
                      {"fit_nodes", quad.fit_nodes},
                      {"nodes", ks.size()},
                      {"E_d", E0},
                      {"E_d_abs_error", out.small_kappa.limit.abs_error},
                      {"mc_error", out.mc_error},
                      {"quadrature_residual", out.quadrature_residual},
                      {"tail_error", out.tail_error}};
  return out;
}

JdIntegral integrate_J_d(int d, const McParams& mc, const QuadParams& quad) {
  auto out = integrate_J_d(
      d, [&](double k) { return estimate_E_d_node(d, k, mc); }, quad);
  out.total.params["replications"] = mc.replications;
  out.total.params["seed"] = mc.seed;
  out.total.params["half_width"] = mc.half_width;
  out.total.params["estimator"] = to_string(mc.estimator);
  return out;
}

ConstantEstimate integrate_J_range(int d, double kappa, double a, double b,
                                   const WalkNode& node, int nodes_per_octave) {
  require_dim(d);
  require_kappa(kappa);
  if (!(a > 0.0) || !(b > a) || !std::isfinite(b)) throw DomainError("need 0 < a < b < inf");
  if (nodes_per_octave < 1) throw DomainError("nodes_per_octave must be positive");
  const double k_lo = kappa / b;
  const double span = std::log(b / a);
  const std::int64_t intervals = intervals_for(span / std::numbers::ln2, nodes_per_octave);
  const double du = span / static_cast<double>(intervals);
  std::vector<double> ks;
  std::vector<ConstantEstimate> es;
  for (std::int64_t j = 0; j <= intervals; ++j) {
    ks.push_back(k_lo * std::exp(static_cast<double>(j) * du));
    es.push_back(node(ks.back()));
  }
  const double norm = std::pow(kappa, -d);
  const SimpsonSum s = log_simpson(d, ks, es, du);
  ConstantEstimate out;
  out.value = norm * s.fine;
  out.abs_error = norm * (std::sqrt(s.var) + s.bias + std::abs(s.fine - s.coarse));
  out.method = EstimateMethod::Quadrature;
  out.params = {{"d", d}, {"kappa", kappa}, {"a", a}, {"b", b}, {"nodes", ks.size()}};
  return out;
}

ConstantEstimate integrate_J_d_range(int d, double a, double b, const WalkNode& node,
                                     int nodes_per_octave) {
  return integrate_J_range(d, 2.0 * d, a, b, node, nodes_per_octave);
}

ConstantEstimate integrate_J_d_range(int d, double a, double b, const McParams& mc,
                                     int nodes_per_octave) {
  auto out = integrate_J_d_range(
      d, a, b, [&](double k) { return estimate_E_d_node(d, k, mc); }, nodes_per_octave);
  out.params["replications"] = mc.replications;
  out.params["seed"] = mc.seed;
  out.params["half_width"] = mc.half_width;
  return out;
}

}  // namespace gscan
