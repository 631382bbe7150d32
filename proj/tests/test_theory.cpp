#include <cmath>
#include <limits>
#include <numbers>

#include "doctest.h"
#include "gscan/constants.hpp"
#include "gscan/error.hpp"
#include "gscan/theory.hpp"

using namespace gscan;

namespace {

// mpmath, 30 digits.
constexpr double kG1 = 0.21487728758831679;
constexpr double kIidAtEE = 1.57444771260441593;
constexpr double kGridTail016 = 7.17193424919900747e-4;
constexpr double kContTail = 1.07064180611908281e-3;
constexpr double kGInt016 = 0.0837340533524956587;

ConstantEstimate known(double v, double err = 0.0) {
  ConstantEstimate c;
  c.value = v;
  c.abs_error = err;
  return c;
}

SettingSpec setting(SettingFamily f, int d, double n) {
  SettingSpec s;
  s.family = f;
  s.d = d;
  s.n = n;
  s.a = 0.5;
  if (f == SettingFamily::DiscreteCube) s.constant = known(d == 1 ? kG1 : 0.0232, 1e-4);
  if (f == SettingFamily::DiscreteRect) s.constant = known(d == 1 ? kG1 : 0.1074, 1e-6);
  if (f == SettingFamily::ContinuousCube) s.constant = known(d == 1 ? 0.25 : 0.05, 1e-3);
  return s;
}

constexpr SettingFamily kScanFamilies[] = {SettingFamily::DiscreteCube, SettingFamily::DiscreteRect,
                                           SettingFamily::ContinuousCube,
                                           SettingFamily::ContinuousRect};

TailRegion unit_region(int d, bool cube) {
  TailRegion r;
  r.origin.assign(static_cast<std::size_t>(d), {0.0, 1.0});
  r.length.assign(cube ? 1 : static_cast<std::size_t>(d), {1.0, 2.0});
  return r;
}

}  // namespace

TEST_CASE("IID normalizer at n = e^e") {
  SettingSpec s;
  s.family = SettingFamily::IID;
  s.n = std::exp(std::numbers::e);
  CHECK(std::abs(normalizer(s, 0.0) - kIidAtEE) < 1e-14);
  CHECK(normalizer_band(s) == 0.0);
}

TEST_CASE("normalizer is affine in tau") {
  for (auto f : kScanFamilies) {
    for (int d = 1; d <= 3; ++d) {
      const auto s = setting(f, d, 1e6);
      const double slope = 1.0 / std::sqrt(2.0 * d * std::log(1e6));
      CHECK(std::abs(normalizer(s, 1.0) - normalizer(s, 0.0) - slope) < 1e-13);
      CHECK(std::abs(normalizer(s, 3.0) - normalizer(s, -2.0) - 5.0 * slope) < 1e-12);
    }
  }
}

TEST_CASE("normalizer round trips") {
  for (auto f : kScanFamilies) {
    for (int d = 1; d <= 3; ++d) {
      for (double n : {10.0, 1e4, 1e9}) {
        const auto s = setting(f, d, n);
        for (double tau = -10.0; tau <= 10.0; tau += 0.5)
          CHECK(std::abs(invert_normalizer(s, normalizer(s, tau)) - tau) < 1e-12);
        const double r = std::sqrt(2.0 * d * std::log(n));
        CHECK(std::abs(invert_normalizer(s, r) + normalizer_shift(s)) < 1e-12);
      }
    }
  }
}

TEST_CASE("d = 1 cubes and rectangles coincide") {
  for (double n : {50.0, 2048.0, 1e8}) {
    const auto c = setting(SettingFamily::DiscreteCube, 1, n);
    const auto r = setting(SettingFamily::DiscreteRect, 1, n);
    for (double tau : {-3.0, 0.0, 2.5}) CHECK(std::abs(normalizer(c, tau) - normalizer(r, tau)) < 1e-14);
    const auto rc = extreme_value_rate(c);
    const auto rr = extreme_value_rate(r);
    CHECK(std::abs(rc.alpha - 4.0 * kG1) < 1e-15);
    CHECK(std::abs(rr.alpha - 4.0 * kG1) < 1e-15);
    CHECK(rc.beta == 1.0);
    CHECK(rr.gamma == 1.0);
  }
}

TEST_CASE("normalizer rejects bad settings") {
  auto s = setting(SettingFamily::DiscreteCube, 2, 1.0);
  CHECK_THROWS_AS(normalizer(s, 0.0), DomainError);
  s.n = 100.0;
  s.constant.reset();
  CHECK_THROWS_AS(normalizer(s, 0.0), ConfigurationError);
  auto c = setting(SettingFamily::ContinuousRect, 1, 100.0);
  c.a = 0.0;
  CHECK_THROWS_AS(normalizer(c, 0.0), DomainError);
  c.a = 1.0;
  c.d = 0;
  CHECK_THROWS_AS(normalizer(c, 0.0), InvalidDimension);
}

TEST_CASE("extreme-value rates") {
  const auto dc = extreme_value_rate(setting(SettingFamily::DiscreteCube, 2, 100.0));
  CHECK(dc.alpha == doctest::Approx(64.0 * 0.0232).epsilon(1e-14));
  CHECK(dc.beta == 2.0);
  CHECK(dc.gamma == 1.0);
  const auto cr = extreme_value_rate(setting(SettingFamily::ContinuousRect, 3, 100.0));
  CHECK(cr.alpha == doctest::Approx(729.0 / 0.125).epsilon(1e-14));
  CHECK(cr.beta == 3.0);
  CHECK(cr.gamma == 6.0);
  const auto cc = extreme_value_rate(setting(SettingFamily::ContinuousCube, 2, 100.0));
  CHECK(cc.alpha == doctest::Approx(2.0 * 0.05 * 64.0).epsilon(1e-14));
  CHECK(cc.gamma == 3.0);
  CHECK_THROWS_AS(extreme_value_rate(setting(SettingFamily::IID, 1, 100.0)), NotApplicable);
}

TEST_CASE("rate expansion reproduces the normalizers") {
  SettingSpec iid;
  iid.family = SettingFamily::IID;
  for (double n : {20.0, 1e5, 1e12}) {
    iid.n = n;
    CHECK(std::abs(u_from_rate({1.0, 1.0, 0.0}, n, 0.7) - normalizer(iid, 0.7)) < 1e-14);
  }
  for (auto f : kScanFamilies) {
    for (int d = 1; d <= 3; ++d) {
      double prev = std::numeric_limits<double>::infinity();
      for (double n : {1e4, 1e6, 1e8}) {
        const auto s = setting(f, d, n);
        const double gap = std::abs(u_from_rate(extreme_value_rate(s), n, 0.0) - normalizer(s, 0.0)) *
                           std::sqrt(2.0 * d * std::log(n));
        CHECK(gap < 0.05);
        CHECK(gap <= prev + 1e-12);
        prev = gap;
      }
    }
  }
}

TEST_CASE("u_from_rate is increasing in n") {
  const RateSpec r{4.0 * kG1, 1.0, 1.0};
  double prev = u_from_rate(r, 100.0, 0.0);
  for (double n = 200.0; n <= 1e12; n *= 2.0) {
    const double u = u_from_rate(r, n, 0.0);
    CHECK(u > prev);
    prev = u;
  }
  CHECK_THROWS_AS(u_from_rate(r, 1.0, 0.0), DomainError);
  CHECK_THROWS_AS(u_from_rate({-1.0, 1.0, 0.0}, 10.0, 0.0), DomainError);
}

TEST_CASE("normalizer band follows the constant's relative error") {
  auto s = setting(SettingFamily::DiscreteRect, 2, 1e4);
  const double r = std::sqrt(4.0 * std::log(1e4));
  CHECK(tau_band(s) == doctest::Approx(2.0 * 1e-6 / 0.1074));
  CHECK(normalizer_band(s) == doctest::Approx(2.0 * 1e-6 / 0.1074 / r));
  auto c = setting(SettingFamily::DiscreteCube, 2, 1e4);
  const double up = normalizer(c, 0.0);
  c.constant->value *= std::exp(1e-3);
  CHECK((normalizer(c, 0.0) - up) * r == doctest::Approx(1e-3).epsilon(1e-9));
  CHECK(normalizer_band(setting(SettingFamily::ContinuousRect, 2, 1e4)) == 0.0);
}

TEST_CASE("continuous tail asymptotics") {
  const double rect = tail_asymptotic(SettingFamily::ContinuousRect, unit_region(1, false), 4.0, 1);
  CHECK(std::abs(rect / kContTail - 1.0) < 1e-13);
  const double cube = tail_asymptotic(SettingFamily::ContinuousCube, unit_region(1, true), 4.0, 1);
  CHECK(std::abs(cube / kContTail - 1.0) < 1e-13);

  auto wide = unit_region(1, true);
  wide.origin[0] = {-3.0, 3.0};
  CHECK(tail_asymptotic(SettingFamily::ContinuousCube, wide, 4.0, 1) == doctest::Approx(6.0 * cube));

  for (int d = 1; d <= 3; ++d) {
    const double du = 0.1;
    // Decreasing once u^2 exceeds the polynomial degree.
    for (double u : {std::sqrt(4.0 * d) + 0.1, 5.0}) {
      const double r0 = tail_asymptotic(SettingFamily::ContinuousRect, unit_region(d, false), u, d);
      const double r1 = tail_asymptotic(SettingFamily::ContinuousRect, unit_region(d, false), u + du, d);
      CHECK(r1 < r0);
      CHECK(std::log(r1 / r0) == doctest::Approx((4 * d - 1) * std::log1p(du / u) - 0.5 * ((u + du) * (u + du) - u * u)));
      const double c0 = tail_asymptotic(SettingFamily::ContinuousCube, unit_region(d, true), u, d, 0.05);
      const double c1 = tail_asymptotic(SettingFamily::ContinuousCube, unit_region(d, true), u + du, d, 0.05);
      CHECK(c1 < c0);
      CHECK(std::log(c1 / c0) == doctest::Approx((2 * d + 1) * std::log1p(du / u) - 0.5 * ((u + du) * (u + du) - u * u)));
    }
  }
}

TEST_CASE("tail asymptotics reject bad regions") {
  auto r = unit_region(1, false);
  r.length[0] = {2.0, 2.0};
  CHECK_THROWS_AS(tail_asymptotic(SettingFamily::ContinuousRect, r, 4.0, 1), DomainError);
  r = unit_region(1, false);
  r.origin[0] = {1.0, 0.0};
  CHECK_THROWS_AS(tail_asymptotic(SettingFamily::ContinuousRect, r, 4.0, 1), DomainError);
  CHECK_THROWS_AS(tail_asymptotic(SettingFamily::ContinuousRect, unit_region(2, false), 4.0, 1), DomainError);
  CHECK_THROWS_AS(tail_asymptotic(SettingFamily::ContinuousCube, unit_region(2, true), 4.0, 2), ConfigurationError);
  CHECK_THROWS_AS(tail_asymptotic(SettingFamily::DiscreteCube, unit_region(1, true), 4.0, 1), NotApplicable);
  CHECK_THROWS_AS(tail_asymptotic_grid(SettingFamily::ContinuousRect, unit_region(1, false), 4.0, 0.0, 1), DomainError);
}

TEST_CASE("grid tail asymptotics") {
  CHECK(std::abs(integrate_G_range(0.16, 1.0, 2.0, 1e-12).value - kGInt016) < 1e-11);
  const double rect = tail_asymptotic_grid(SettingFamily::ContinuousRect, unit_region(1, false), 4.0, 0.16, 1);
  CHECK(std::abs(rect / kGridTail016 - 1.0) < 1e-9);
  const double cube = tail_asymptotic_grid(SettingFamily::ContinuousCube, unit_region(1, true), 4.0, 0.16, 1);
  CHECK(std::abs(cube / rect - 1.0) < 1e-6);

  double prev = 0.0;
  for (double kappa : {1e-1, 1e-2, 1e-3, 1e-4}) {
    const double ratio =
        tail_asymptotic_grid(SettingFamily::ContinuousRect, unit_region(1, false), 4.0, kappa, 1) / kContTail;
    CHECK(ratio > prev);
    CHECK(ratio < 1.0);
    // Approach is like 1 - c sqrt(kappa).
    CHECK(1.0 - ratio < 1.5 * std::sqrt(kappa));
    prev = ratio;
  }
  CHECK(prev > 0.98);
}

TEST_CASE("clump rates") {
  const double tau = 0.3, s = std::exp(-tau);
  auto cc = setting(SettingFamily::ContinuousCube, 2, 1e4);
  CHECK(clump_rate(cc, tau, 1.0, 2.0) == doctest::Approx(s * 0.75));
  CHECK(clump_rate(cc, tau, 1.0, 1e12) == doctest::Approx(s));
  CHECK(clump_rate(cc, tau, 1.0, 1.0 + 1e-9) < 1e-8);
  auto cr = setting(SettingFamily::ContinuousRect, 2, 1e4);
  CHECK(clump_rate(cr, tau, 1.0, 2.0) == doctest::Approx(s * 0.25));

  auto dr = setting(SettingFamily::DiscreteRect, 1, 1e4);
  dr.constant = known(kG1, 1e-12);
  CHECK(clump_rate(dr, tau, 1e-9, std::numeric_limits<double>::infinity()) == doctest::Approx(s).epsilon(1e-6));
  CHECK(clump_rate(dr, tau, 1.0, 1.0 + 1e-9) < 1e-8);
  auto dc = setting(SettingFamily::DiscreteCube, 1, 1e4);
  dc.constant = known(kG1, 1e-12);
  CHECK(clump_rate(dc, tau, 1e-9, std::numeric_limits<double>::infinity()) == doctest::Approx(s).epsilon(1e-6));
  CHECK(clump_rate(dc, tau, 0.5, 3.0) == doctest::Approx(clump_rate(dr, tau, 0.5, 3.0)));

  auto dc2 = setting(SettingFamily::DiscreteCube, 2, 1e4);
  CHECK_THROWS_AS(clump_rate(dc2, tau, 0.5, 3.0), NotApplicable);
  dc2.profile_integral = [](double a, double b) { return known(0.0232 * (1.0 / a - 1.0 / b) / 2.0, 1e-6); };
  const auto est = clump_rate_estimate(dc2, tau, 0.5, 3.0);
  CHECK(est.value == doctest::Approx(s * (2.0 - 1.0 / 3.0) / 2.0));
  CHECK(est.abs_error > 0.0);

  for (auto f : kScanFamilies) {
    auto st = setting(f, 2, 1e4);
    if (f == SettingFamily::DiscreteCube) st.profile_integral = dc2.profile_integral;
    double prev = 0.0;
    for (double b : {0.6, 1.0, 2.0, 5.0}) {
      const double lam = clump_rate(st, 0.0, 0.5, b);
      CHECK(lam >= prev);
      prev = lam;
    }
    CHECK(clump_rate(st, 0.0, 0.25, 2.0) >= clump_rate(st, 0.0, 0.5, 2.0));
    CHECK_THROWS_AS(clump_rate(st, 0.0, 2.0, 2.0), DomainError);
  }
  CHECK_THROWS_AS(clump_rate(setting(SettingFamily::IID, 1, 1e4), 0.0, 1.0, 2.0), NotApplicable);
}
