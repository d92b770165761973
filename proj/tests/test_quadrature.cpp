#include "mosco/constants.hpp"
#include "mosco/quadrature.hpp"

#include "oracle_values.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace mosco;
using doctest::Approx;

TEST_CASE("gauss_legendre integrates polynomials of degree 2n-1 exactly") {
  const auto& rule = gauss_legendre(5);
  CHECK(rule.nodes.minCoeff() == Approx(oracle::kLegendre5Node0).epsilon(1e-14));
  double s = 0.0;
  for (int i = 0; i < 5; ++i) s += rule.weights[i] * std::pow(rule.nodes[i], 8);
  CHECK(s == Approx(2.0 / 9.0).epsilon(1e-14));
  CHECK(rule.weights.sum() == Approx(2.0).epsilon(1e-15));
}

TEST_CASE("gauss_jacobi matches an independent rule and its moments") {
  const auto& rule = gauss_jacobi(6, 0.0, -0.5);
  Eigen::Index k;
  const double x0 = rule.nodes.minCoeff(&k);
  CHECK(x0 == Approx(oracle::kJacobi6Node0).epsilon(1e-13));
  CHECK(rule.weights[k] == Approx(oracle::kJacobi6Weight0).epsilon(1e-13));
  // int_{-1}^{1} (1+x)^{-1/2} x^2 dx = 2^{1/2} (1/0.5 - 2*2/1.5 + 4/2.5)
  double s = 0.0;
  for (int i = 0; i < 6; ++i) s += rule.weights[i] * rule.nodes[i] * rule.nodes[i];
  CHECK(s == Approx(std::sqrt(2.0) * (2.0 - 8.0 / 3.0 + 1.6)).epsilon(1e-14));
}

TEST_CASE("adaptive integration handles endpoint singularities and infinite ranges") {
  auto r = integrate_adaptive([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, 1e-12, 1e-12);
  CHECK(r.converged);
  CHECK(r.value == Approx(2.0).epsilon(1e-9));
  auto inf = integrate_to_infinity([](double x) { return std::exp(-x); }, 0.0);
  CHECK(inf.converged);
  CHECK(inf.value == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("integrate_radial uses the leading exponent next to zero") {
  RadialHints hints;
  hints.leading_exponent = -0.9;
  hints.breakpoints = {0.5};
  const double v = integrate_radial([](double r) { return std::pow(r, -0.9) * (1.0 + r); }, 0.0, 1.0, hints, 12);
  CHECK(v == Approx(1.0 / 0.1 + 1.0 / 1.1).epsilon(1e-13));
  auto a = integrate_radial_adaptive([](double r) { return std::pow(r, -0.9) * std::exp(-r); }, 0.0, kInf, hints);
  CHECK(a.converged);
  CHECK(a.value == Approx(std::tgamma(0.1)).epsilon(1e-10));
}

TEST_CASE("fractional constant and normalization ratio") {
  CHECK(sphere_area(1) == Approx(2.0));
  CHECK(sphere_area(2) == Approx(2.0 * std::numbers::pi));
  CHECK(fractional_constant(1, 1.5) == Approx(oracle::kFracConst1d15).epsilon(1e-13));
  CHECK(fractional_constant(2, 1.9) == Approx(oracle::kFracConst2d19).epsilon(1e-13));
  CHECK(normalization_ratio(1, 1.999) == Approx(oracle::kRatio1d1999).epsilon(1e-11));
  CHECK(normalization_ratio(2, 1.999) == Approx(oracle::kRatio2d1999).epsilon(1e-11));
  // The ratio with the sphere area in the numerator tends to 1.
  double prev = 0.0;
  for (double a : {1.9, 1.99, 1.999, 1.9999}) {
    const double r = normalization_ratio_corrected(2, a);
    CHECK(std::abs(r - 1.0) < std::abs(prev - 1.0));
    prev = r;
  }
  CHECK_THROWS_AS(fractional_constant(1, 2.0), std::domain_error);
}
