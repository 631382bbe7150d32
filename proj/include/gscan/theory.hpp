#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gscan/constants.hpp"

namespace gscan {

enum class SettingFamily { IID, DiscreteCube, DiscreteRect, ContinuousCube, ContinuousRect };

std::string to_string(SettingFamily f);
// Accepts the enumerator names and their snake_case forms.
SettingFamily parse_setting_family(const std::string& s);

// Integral of the family's side-length profile (J_d(h) or G_d(h)) over
// h in [a, b]; b may be +inf.
using ProfileIntegral = std::function<ConstantEstimate(double a, double b)>;

struct SettingSpec {
  SettingFamily family = SettingFamily::IID;
  int d = 1;
  double n = 2.0;
  double a = 1.0;  // minimum side length, continuous settings
  // J_d for DiscreteCube, G_d for DiscreteRect, E_d for ContinuousCube.
  std::optional<ConstantEstimate> constant;
  ProfileIntegral profile_integral;
};

// Throws DomainError / InvalidDimension / ConfigurationError when the
// setting is not usable (n <= 1, d < 1, a <= 0, missing constant).
void validate(const SettingSpec& s);

// A(s) in u_n(tau) = sqrt(2d log n) + (A(s) + tau) / sqrt(2d log n).
double normalizer_shift(const SettingSpec& s);

double normalizer(const SettingSpec& s, double tau);

// tau such that normalizer(s, tau) = m.
double invert_normalizer(const SettingSpec& s, double m);

// Half-width of u_n(tau) induced by the constant's abs_error:
// |du / d log c| * abs_error / c. Zero for settings without a constant.
double normalizer_band(const SettingSpec& s);

// The same band on the tau scale.
double tau_band(const SettingSpec& s);

struct RateSpec {
  double alpha = 1.0;
  double beta = 1.0;
  double gamma = 0.0;
};

// f(n) = alpha n^beta (log n)^gamma. Throws NotApplicable for IID.
RateSpec extreme_value_rate(const SettingSpec& s);

// sqrt(2 beta log n) + ((gamma - 1/2) log(beta log n)
//   + log(alpha / (2 beta^gamma sqrt(pi))) + tau) / sqrt(2 beta log n).
double u_from_rate(const RateSpec& r, double n, double tau);

// IID normalizer evaluated at n' = f(n), without expanding in n.
double u_at_rate(const RateSpec& r, double n, double tau);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

// Product region: window origins x_i in origin[i]; side lengths h_i in
// length[i] (one shared interval for cubes).
struct TailRegion {
  std::vector<Interval> origin;
  std::vector<Interval> length;
};

// Leading-order P[sup over the region of W(A)/sqrt|A| > u] for the
// continuous white noise. Rect: 4^{-d} (2 pi)^{-1/2} I u^{4d-1} e^{-u^2/2},
// I = prod_i |X_i| (1/h_lo - 1/h_hi). Cube: E_d (2 pi)^{-1/2} I u^{2d+1}
// e^{-u^2/2}, I = prod_i |X_i| (h_lo^{-d} - h_hi^{-d}) / d.
// `E_d` is required for cubes with d > 1 (E_1 = 1/4).
double tail_asymptotic(SettingFamily family, const TailRegion& region, double u, int d,
                       std::optional<double> E_d = std::nullopt);

// Grid version with q u^2 = kappa: G(h; kappa) replaces 1/(4h^2) per axis
// (rect) and J_d(h; kappa) replaces E_d / h^{d+1} (cube). For cubes with
// d > 1, `node` evaluates E_d(kappa); at d = 1 the exact F(kappa)^2 is used.
double tail_asymptotic_grid(SettingFamily family, const TailRegion& region, double u,
                            double kappa, int d, const WalkNode& node = {});

// Poisson mean of the number of clumps above u_n(tau) for windows with
// side in [a, b]: e^{-tau} times the fraction of the rate carried by those
// sides. Discrete cubes need a J_d profile integral unless d = 1.
ConstantEstimate clump_rate_estimate(const SettingSpec& s, double tau, double a, double b);

double clump_rate(const SettingSpec& s, double tau, double a, double b);

}  // namespace gscan
