#include "gscan/theory.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>

#include "gscan/error.hpp"

namespace gscan {

std::string to_string(SettingFamily f) {
  switch (f) {
    case SettingFamily::IID: return "IID";
    case SettingFamily::DiscreteCube: return "DiscreteCube";
    case SettingFamily::DiscreteRect: return "DiscreteRect";
    case SettingFamily::ContinuousCube: return "ContinuousCube";
    case SettingFamily::ContinuousRect: return "ContinuousRect";
  }
  return "?";
}

SettingFamily parse_setting_family(const std::string& s) {
  std::string k;
  for (char c : s)
    if (c != '_' && c != '-') k += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (k == "iid") return SettingFamily::IID;
  if (k == "discretecube") return SettingFamily::DiscreteCube;
  if (k == "discreterect") return SettingFamily::DiscreteRect;
  if (k == "continuouscube") return SettingFamily::ContinuousCube;
  if (k == "continuousrect") return SettingFamily::ContinuousRect;
  throw InvalidFamily("unknown setting '" + s + "'");
}

namespace {

const double kLogTwoSqrtPi = std::log(2.0 * std::sqrt(std::numbers::pi));
const double kLogSqrtPi = 0.5 * std::log(std::numbers::pi);

bool needs_constant(SettingFamily f) {
  return f == SettingFamily::DiscreteCube || f == SettingFamily::DiscreteRect ||
         f == SettingFamily::ContinuousCube;
}

int effective_d(const SettingSpec& s) { return s.family == SettingFamily::IID ? 1 : s.d; }

// Multiplicity of log(constant) in A(s).
double log_constant_weight(const SettingSpec& s) {
  switch (s.family) {
    case SettingFamily::DiscreteCube:
    case SettingFamily::ContinuousCube: return 1.0;
    case SettingFamily::DiscreteRect: return s.d;
    default: return 0.0;
  }
}

double scale(const SettingSpec& s) {
  return std::sqrt(2.0 * effective_d(s) * std::log(s.n));
}

}  // namespace

void validate(const SettingSpec& s) {
  if (!(s.n > 1.0) || !std::isfinite(s.n)) throw DomainError("n must exceed 1");
  if (s.d < 1) throw InvalidDimension("dimension must be at least 1");
  if ((s.family == SettingFamily::ContinuousCube || s.family == SettingFamily::ContinuousRect) &&
      !(s.a > 0.0))
    throw DomainError("continuous settings need a > 0");
  if (needs_constant(s.family)) {
    if (!s.constant) throw ConfigurationError(to_string(s.family) + " needs its constant");
    if (!(s.constant->value > 0.0)) throw DomainError("constant must be positive");
  }
}

double normalizer_shift(const SettingSpec& s) {
  validate(s);
  const double L = std::log(s.n);
  const double d = s.d;
  const double logdL = std::log(d * L);
  switch (s.family) {
    case SettingFamily::IID:
      return -0.5 * std::log(L) - kLogTwoSqrtPi;
    case SettingFamily::DiscreteCube:
      return 0.5 * logdL + d * std::log(2.0 * d) + std::log(s.constant->value) - kLogSqrtPi;
    case SettingFamily::DiscreteRect:
      return (d - 0.5) * logdL + (2.0 * d - 1.0) * std::numbers::ln2 + d * std::log(d) +
             d * std::log(s.constant->value) - kLogSqrtPi;
    case SettingFamily::ContinuousCube:
      return (d + 0.5) * logdL + d * std::numbers::ln2 + std::log(s.constant->value) -
             std::log(d) - d * std::log(s.a) - kLogSqrtPi;
    case SettingFamily::ContinuousRect:
      return (2.0 * d - 0.5) * logdL - std::log(2.0 * std::pow(s.a, d)) - kLogSqrtPi;
  }
  return 0.0;
}

double normalizer(const SettingSpec& s, double tau) {
  const double shift = normalizer_shift(s);
  const double r = scale(s);
  return r + (shift + tau) / r;
}

double invert_normalizer(const SettingSpec& s, double m) {
  const double shift = normalizer_shift(s);
  const double r = scale(s);
  return (m - r) * r - shift;
}

double tau_band(const SettingSpec& s) {
  validate(s);
  if (!needs_constant(s.family)) return 0.0;
  return log_constant_weight(s) * s.constant->abs_error / s.constant->value;
}

double normalizer_band(const SettingSpec& s) { return tau_band(s) / scale(s); }

RateSpec extreme_value_rate(const SettingSpec& s) {
  validate(s);
  const double d = s.d;
  switch (s.family) {
    case SettingFamily::IID:
      throw NotApplicable("the IID setting has no extreme-value rate");
    case SettingFamily::DiscreteCube:
      return {std::pow(2.0 * d, d + 1) * s.constant->value, d, 1.0};
    case SettingFamily::DiscreteRect:
      return {std::pow(2.0 * d, 2.0 * d) * std::pow(s.constant->value, d), d, d};
    case SettingFamily::ContinuousCube:
      return {2.0 * s.constant->value * std::pow(2.0 * d / s.a, d), d, d + 1.0};
    case SettingFamily::ContinuousRect:
      return {std::pow(d, 2.0 * d) / std::pow(s.a, d), d, 2.0 * d};
  }
  return {};
}

namespace {

void check_rate(const RateSpec& r, double n) {
  if (!(r.alpha > 0.0) || !(r.beta > 0.0)) throw DomainError("rate needs alpha, beta > 0");
  if (!(n > 1.0) || !std::isfinite(n)) throw DomainError("n must exceed 1");
}

}  // namespace

double u_from_rate(const RateSpec& r, double n, double tau) {
  check_rate(r, n);
  const double bl = r.beta * std::log(n);
  const double root = std::sqrt(2.0 * bl);
  const double shift = (r.gamma - 0.5) * std::log(bl) + std::log(r.alpha) -
                       r.gamma * std::log(r.beta) - kLogTwoSqrtPi;
  return root + (shift + tau) / root;
}

double u_at_rate(const RateSpec& r, double n, double tau) {
  check_rate(r, n);
  const double log_f = std::log(r.alpha) + r.beta * std::log(n) + r.gamma * std::log(std::log(n));
  if (!(log_f > 0.0)) throw DomainError("f(n) must exceed 1");
  const double root = std::sqrt(2.0 * log_f);
  return root + (-0.5 * std::log(log_f) - kLogTwoSqrtPi + tau) / root;
}

namespace {

void check_region(SettingFamily family, const TailRegion& r, int d, double u) {
  if (d < 1) throw InvalidDimension("dimension must be at least 1");
  if (family != SettingFamily::ContinuousCube && family != SettingFamily::ContinuousRect)
    throw NotApplicable("tail asymptotics cover the continuous families only");
  const std::size_t nl = family == SettingFamily::ContinuousCube ? 1 : static_cast<std::size_t>(d);
  if (r.origin.size() != static_cast<std::size_t>(d) || r.length.size() != nl)
    throw DomainError("region rank does not match d");
  for (const auto& x : r.origin)
    if (!(x.hi > x.lo)) throw DomainError("degenerate origin interval");
  for (const auto& h : r.length)
    if (!(h.lo > 0.0) || !(h.hi > h.lo)) throw DomainError("degenerate side-length interval");
  if (!(u > 0.0)) throw DomainError("u must be positive");
}

double origin_measure(const TailRegion& r) {
  double m = 1.0;
  for (const auto& x : r.origin) m *= x.hi - x.lo;
  return m;
}

const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);

}  // namespace

double tail_asymptotic(SettingFamily family, const TailRegion& region, double u, int d,
                       std::optional<double> E_d) {
  check_region(family, region, d, u);
  const double gauss = std::exp(-0.5 * u * u);
  if (family == SettingFamily::ContinuousRect) {
    double I = origin_measure(region);
    for (const auto& h : region.length) I *= 1.0 / h.lo - 1.0 / h.hi;
    return std::pow(4.0, -d) * kInvSqrt2Pi * I * std::pow(u, 4 * d - 1) * gauss;
  }
  double E = 0.25;
  if (d > 1) {
    if (!E_d) throw ConfigurationError("cube tail needs E_d for d > 1");
    E = *E_d;
  } else if (E_d) {
    E = *E_d;
  }
  const auto& h = region.length.front();
  const double I = origin_measure(region) * (std::pow(h.lo, -d) - std::pow(h.hi, -d)) / d;
  return E * kInvSqrt2Pi * I * std::pow(u, 2 * d + 1) * gauss;
}

double tail_asymptotic_grid(SettingFamily family, const TailRegion& region, double u,
                            double kappa, int d, const WalkNode& node) {
  check_region(family, region, d, u);
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw DomainError("kappa must be positive");
  const double gauss = std::exp(-0.5 * u * u);
  if (family == SettingFamily::ContinuousRect) {
    double I = origin_measure(region);
    for (const auto& h : region.length) I *= integrate_G_range(kappa, h.lo, h.hi, 1e-12).value;
    return kInvSqrt2Pi * I * std::pow(u, 4 * d - 1) * gauss;
  }
  WalkNode E = node;
  if (!E) {
    if (d > 1) throw ConfigurationError("cube grid tail needs an E_d evaluator for d > 1");
    E = [](double k) {
      const auto f = pickands_F(k);
      ConstantEstimate e;
      e.value = f.value * f.value;
      e.abs_error = 2.0 * f.value * f.abs_error;
      return e;
    };
  }
  const auto& h = region.length.front();
  const double I = origin_measure(region) * integrate_J_range(d, kappa, h.lo, h.hi, E, 16).value;
  return kInvSqrt2Pi * I * std::pow(u, 2 * d + 1) * gauss;
}

ConstantEstimate clump_rate_estimate(const SettingSpec& s, double tau, double a, double b) {
  if (!(a > 0.0) || !(b > a)) throw DomainError("need 0 < a < b");
  const double d = s.d;
  const double scale = std::exp(-tau);
  ConstantEstimate out;
  out.method = EstimateMethod::Quadrature;
  out.params = {{"setting", to_string(s.family)}, {"d", s.d}, {"tau", tau}, {"a", a}};
  out.params["b"] = std::isinf(b) ? nlohmann::json("inf") : nlohmann::json(b);
  switch (s.family) {
    case SettingFamily::IID:
      throw NotApplicable("the IID setting has no side-length restriction");
    case SettingFamily::ContinuousCube:
      out.value = scale * (1.0 - std::pow(a / b, d));
      return out;
    case SettingFamily::ContinuousRect:
      out.value = scale * std::pow(1.0 - a / b, d);
      return out;
    case SettingFamily::DiscreteCube:
    case SettingFamily::DiscreteRect:
      break;
  }
  validate(s);
  const bool cube = s.family == SettingFamily::DiscreteCube;
  ConstantEstimate part;
  if (s.profile_integral) {
    part = s.profile_integral(a, b);
  } else if (!cube || s.d == 1) {
    part = integrate_G_d_range(s.d, a, b);
  } else {
    throw NotApplicable("discrete cubes with d > 1 need a J_d profile integral");
  }
  const ConstantEstimate& c = *s.constant;
  const double frac = part.value / c.value;
  const double rel = part.abs_error / part.value + c.abs_error / c.value;
  const double power = cube ? 1.0 : d;
  out.value = scale * std::pow(frac, power);
  out.abs_error = out.value * power * rel;
  out.params["fraction"] = frac;
  return out;
}

double clump_rate(const SettingSpec& s, double tau, double a, double b) {
  return clump_rate_estimate(s, tau, a, b).value;
}

}  // namespace gscan
