#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "eqcycle/hamiltonian.hpp"
#include "eqcycle/ode.hpp"

using namespace eqcycle;

namespace {

// independent oracle: plain bisection on H(y,0) - h over a fixed bracket
double bisect_axis(double lo, double hi, double xi, double h) {
  auto f = [&](double y) { return -std::exp(-xi * y) * (xi * y + 1) + 1 - h; };
  for (int i = 0; i < 200; ++i) {
    const double m = 0.5 * (lo + hi);
    if ((f(m) < 0) == (f(lo) < 0)) lo = m; else hi = m;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("H and g closed-form values") {
  CHECK(H_eval(0, 0, 0.5) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(H_eval(0, 0, 1.0) == doctest::Approx(0.0).epsilon(1e-15));
  // H(0,z) = xi (z - 1 + e^{-z})
  CHECK(H_eval(0, 1, 0.5) ==
        doctest::Approx(0.5 * std::exp(-1.0)).epsilon(1e-14));
  CHECK(H_eval(-2, 0, 0.5) == doctest::Approx(1.0).epsilon(1e-14));

  CHECK(g_eval(0, 0, 0.5) == doctest::Approx(2.0));
  CHECK(g_eval(0, 0, 1.0) == doctest::Approx(1.0));
  CHECK(g_eval(2, -1, 0.5) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("factorization f0 = g J grad H holds to rounding") {
  CHECK(factorization_residual(0, 0, 0.5) == 0.0);
  CHECK(factorization_residual(1, 1, 0.5) < 1e-13);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> U(-3.0, 3.0);
  for (double xi : {0.3, 0.5, 1.0}) {
    double worst = 0;
    for (int k = 0; k < 1000; ++k)
      worst = std::max(worst, factorization_residual(U(rng), U(rng), xi));
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("transversality: dH/dy on the axis is xi^2 y e^{-xi y}") {
  for (double xi : {0.3, 0.5, 1.0})
    for (double y = -5.0; y <= 5.0; y += 0.25) {
      const double expect = xi * xi * y * std::exp(-xi * y);
      CHECK(grad_H(y, 0, xi).y == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("H is positive away from the origin on bounded sets") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> U(-3.0, 3.0);
  for (int k = 0; k < 2000; ++k) {
    const double y = U(rng), z = U(rng);
    if (std::hypot(y, z) < 1e-3) continue;
    CHECK(H_eval(y, z, 0.5) > 0.0);
  }
}

TEST_CASE("lambert roots: anchors and dichotomy") {
  const LambertRoots sep = lambert_roots(1.0, 0.5);
  CHECK(sep.y_lower == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(!sep.y_upper);

  // oracle cross-check at h = 0.4 (spec anchors ~ -1.404 / 2.753)
  const LambertRoots r = lambert_roots(0.4, 0.5);
  REQUIRE(r.y_upper.has_value());
  const double lo_oracle = bisect_axis(-20.0, -1e-9, 0.5, 0.4);
  const double up_oracle = bisect_axis(1e-9, 50.0, 0.5, 0.4);
  CHECK(r.y_lower == doctest::Approx(lo_oracle).epsilon(1e-11));
  CHECK(*r.y_upper == doctest::Approx(up_oracle).epsilon(1e-11));
  CHECK(r.y_lower == doctest::Approx(-1.404).epsilon(1e-3));
  CHECK(*r.y_upper == doctest::Approx(2.753).epsilon(1e-3));

  // residuals below 1e-12
  auto resid = [&](double y, double h) {
    return std::fabs(-std::exp(-0.5 * y) * (0.5 * y + 1) + 1 - h);
  };
  for (double h = 0.05; h < 1.0; h += 0.05) {
    const LambertRoots rr = lambert_roots(h, 0.5);
    REQUIRE(rr.y_upper.has_value());
    CHECK(resid(rr.y_lower, h) <= 1e-12);
    CHECK(resid(*rr.y_upper, h) <= 1e-12);
  }
  for (double h : {1.0, 1.5, 3.0}) {
    const LambertRoots rr = lambert_roots(h, 0.5);
    CHECK(!rr.y_upper.has_value());
    CHECK(resid(rr.y_lower, h) <= 1e-12);
  }
  // both roots collapse to 0 as h -> 0+
  const LambertRoots tiny = lambert_roots(1e-8, 0.5);
  CHECK(std::fabs(tiny.y_lower) < 1e-3);
  CHECK(std::fabs(*tiny.y_upper) < 1e-3);

  CHECK_THROWS_AS(lambert_roots(0.0, 0.5), std::domain_error);
  CHECK_THROWS_AS(lambert_roots(-1.0, 0.5), std::domain_error);
}

TEST_CASE("axis diffeomorphism h <-> y_D") {
  CHECK(yD_from_h(h_from_yD(1.7, 0.5), 0.5) ==
        doctest::Approx(1.7).epsilon(1e-10));
  CHECK(h_from_yD(1e-6, 0.5) > 0.0);
  CHECK(h_from_yD(1e-6, 0.5) < 1e-9);
  const double up = bisect_axis(1e-9, 50.0, 0.5, 0.4);
  CHECK(h_from_yD(up, 0.5) == doctest::Approx(0.4).epsilon(1e-10));
  CHECK_THROWS_AS(h_from_yD(-1.0, 0.5), std::domain_error);
  CHECK_THROWS_AS(yD_from_h(1.5, 0.5), std::domain_error);
}

TEST_CASE("closed level sets: closure, conservation, axis crossings") {
  const LevelSet ls = trace_level_set(0.4, 0.5, 1e-8, 1e-10);
  REQUIRE(ls.kind == LevelKind::closed);
  REQUIRE(ls.period.has_value());
  CHECK(ls.closure_gap <= 1e-8);
  double worst = 0, ymin = 1e9, ymax = -1e9;
  for (const auto& p : ls.polyline) {
    worst = std::max(worst, std::fabs(H_eval(p.y, p.z, 0.5) - 0.4));
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  CHECK(worst <= 1e-8);
  // passes through the two Lambert crossings
  CHECK(ymax == doctest::Approx(2.753).epsilon(2e-3));
  CHECK(ymin == doctest::Approx(-1.404).epsilon(2e-3));
}

TEST_CASE("conservation along the flow at rtol 1e-10") {
  for (double h : {0.1, 0.4, 0.8}) {
    const LevelSet ls = trace_level_set(h, 0.5, 1e-8, 1e-10);
    double worst = 0;
    for (const auto& p : ls.polyline)
      worst = std::max(worst, std::fabs(H_eval(p.y, p.z, 0.5) - h));
    CHECK(worst <= 1e-8);
  }
}

TEST_CASE("unbounded level set h = 1: branch asymptotics") {
  const LevelSet ls = trace_level_set(1.0, 0.5);
  REQUIRE(ls.kind == LevelKind::unbounded);
  CHECK(!ls.period.has_value());
  REQUIRE(ls.branch_to_Q3.size() > 10);
  // linear branch: z ~ y + 1 + 1/xi
  const auto& q3 = ls.branch_to_Q3.back();
  CHECK(q3.z == doctest::Approx(q3.y + 1.0 + 2.0).epsilon(1e-6));
  // the other branch decreases like -ln y
  const auto& q6 = ls.branch_to_Q6.back();
  CHECK(q6.z < 0);
  CHECK(std::fabs(-q6.z / std::log(q6.y)) ==
        doctest::Approx(1.0).epsilon(0.15));
  // every sample satisfies the level equation
  for (const auto& p : ls.polyline)
    CHECK(std::fabs(H_eval(p.y, p.z, 0.5) - 1.0) < 1e-10);
  // meets the axis at the lower Lambert root
  CHECK(ls.polyline[ls.branch_to_Q3.size() - 1].y ==
        doctest::Approx(-2.0).epsilon(1e-9));

  CHECK_THROWS_AS(trace_level_set(0.0, 0.5), std::domain_error);
}

TEST_CASE("level-set period is consistent between h values") {
  // near the center the period tends to the linear one 2*pi/sqrt(xi)
  const LevelSet tiny = trace_level_set(1e-6, 0.5, 1e-8, 1e-11);
  CHECK(*tiny.period == doctest::Approx(2 * M_PI / std::sqrt(0.5)).epsilon(1e-2));
}
