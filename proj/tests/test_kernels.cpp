#include "mosco/constants.hpp"
#include "mosco/domain.hpp"
#include "mosco/kernel.hpp"
#include "mosco/mollifier.hpp"

#include "oracle_values.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace mosco;
using doctest::Approx;

namespace {

Mollifier family(MollifierKind kind, int dim = 1, double beta = 2.0) {
  MollifierParams p;
  p.kind = kind;
  p.dim = dim;
  p.beta = beta;
  return Mollifier(p);
}

KernelFamily kernel(KernelKind kind, int dim = 1) {
  KernelParams p;
  p.kind = kind;
  p.base.dim = dim;
  if (kind == KernelKind::J4) p.base.kind = MollifierKind::BoundedPoly;
  return KernelFamily(p);
}

}  // namespace

TEST_CASE("power-law mollifier values") {
  const auto rho = family(MollifierKind::PowerLaw);
  CHECK(rho(0.5, make_point(0.5)) == Approx(oracle::kRhoPowerLaw1d).epsilon(1e-15));
  CHECK(rho(0.5, make_point(-0.5)) == rho(0.5, make_point(0.5)));
  CHECK(rho(0.5, make_point(1.5)) == 0.0);
  const auto bp = family(MollifierKind::BoundedPoly, 2);
  CHECK(bp(0.1, make_point(0.2, 0.0)) == 0.0);
}

TEST_CASE("every family has unit mass and a vanishing tail") {
  std::vector<Mollifier> families{
      family(MollifierKind::PowerLaw, 1),         family(MollifierKind::PowerLaw, 2),
      family(MollifierKind::BoundedPoly, 2),      family(MollifierKind::LogAnnulus, 1),
      family(MollifierKind::ShiftedPower, 1, -0.5), family(MollifierKind::ShiftedCritical, 2),
      family(MollifierKind::ShiftedRatio, 1, 1.0), family(MollifierKind::Profile, 2),
  };
  for (const auto& f : families) {
    CAPTURE(to_string(f.kind()));
    CAPTURE(f.dim());
    CHECK(total_mass(f, 0.1) == Approx(1.0).epsilon(1e-9));
    CHECK(tail_mass(f, 0.01, 0.5) < tail_mass(f, 0.1, 0.5) + 1e-15);
  }
}

TEST_CASE("concentration integral matches eps / (beta + eps)") {
  const auto rho = family(MollifierKind::PowerLaw);
  for (double beta : {0.5, 1.0, 2.0}) {
    const auto v = concentration_integral(rho, beta, 1.0, {0.1, 0.01});
    CHECK(v[0] == Approx(0.1 / (beta + 0.1)).epsilon(1e-10));
    CHECK(v[1] == Approx(0.01 / (beta + 0.01)).epsilon(1e-10));
  }
  CHECK(concentration_integral(rho, 2.0, 1.0, {0.01})[0] == Approx(0.0049751243781).epsilon(1e-10));
  CHECK(concentration_integral(rho, 0.0, 1.0, {0.1})[0] == Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(concentration_integral(rho, -1.0, 1.0, {0.1}), std::domain_error);
}

TEST_CASE("parameter ranges are enforced") {
  CHECK_THROWS_AS(family(MollifierKind::PowerLaw).check_eps(0.0), std::domain_error);
  CHECK_THROWS(family(MollifierKind::BoundedPoly, 1, -1.0));
  CHECK_THROWS_AS(mollifier_kind_from_string("gaussian"), std::invalid_argument);
  CHECK(mollifier_kind_from_string("power_law") == MollifierKind::PowerLaw);
}

TEST_CASE("nu^alpha for the catalog examples") {
  const auto pl = family(MollifierKind::PowerLaw, 2);
  const double alpha = 1.7;
  const double r = 0.3;
  CHECK(nu_alpha_radial(pl, alpha, r) ==
        Approx((2.0 - alpha) / (2.0 * std::numbers::pi) * std::pow(r, -2.0 - alpha)).epsilon(1e-14));
  CHECK(nu_alpha_radial(pl, alpha, 1.2) == 0.0);
  const auto bp = family(MollifierKind::BoundedPoly, 2);
  const double eps = 2.0 - alpha;
  CHECK(nu_alpha_radial(bp, alpha, 0.1) == Approx(4.0 / (2.0 * std::numbers::pi * std::pow(eps, 4))).epsilon(1e-13));
  CHECK(nu_alpha_radial(bp, alpha, 0.31) == 0.0);
}

TEST_CASE("catalog kernels") {
  const auto j1 = kernel(KernelKind::J1);
  CHECK(j1(1.5, make_point(0.0), make_point(0.5)) ==
        Approx(fractional_constant(1, 1.5) * std::pow(0.5, -2.5)).epsilon(1e-14));
  CHECK(j1.radial(1.5, 0.3) == Approx(oracle::kJ1At03Alpha15).epsilon(1e-13));
  const auto j3 = kernel(KernelKind::J3);
  CHECK(j3.radial(1.5, 1.5) == Approx(oracle::kJ3TailAlpha15).epsilon(1e-14));
  const auto j4 = kernel(KernelKind::J4);
  CHECK(j4(1.9, make_point(0.0), make_point(0.2)) == 0.0);
  const auto x = make_point(0.1), y = make_point(0.35);
  CHECK(eval_kernel(j1, 1.7, x, y) == eval_kernel(j1, 1.7, y, x));
  CHECK_THROWS_AS(j1.radial(1.5, 0.0), std::domain_error);
  CHECK_THROWS_AS(kernel_kind_from_string("j9"), std::invalid_argument);
}

TEST_CASE("perturbed kernel is symmetric and within its Lambda band") {
  KernelParams p;
  p.kind = KernelKind::Perturbed;
  p.base.dim = 2;
  p.lambda = 2.0;
  p.seed = 17;
  KernelFamily k(p);
  const auto x = make_point(0.2, 0.7), y = make_point(0.45, 0.55);
  CHECK(k(1.8, x, y) == Approx(k(1.8, y, x)).epsilon(1e-15));
  for (double t = 0.0; t < 1.0; t += 0.05) {
    const double c = k.modulation(make_point(t, 1.0 - t), make_point(0.3, 0.2 + t));
    CHECK(c >= 0.5 - 1e-14);
    CHECK(c <= 2.0 + 1e-14);
  }
}

TEST_CASE("condition (E)") {
  SUBCASE("nu against itself") {
    const auto r = check_condition_E(kernel(KernelKind::Nu), 1.9);
    CHECK(r.holds);
    CHECK(r.worst_ratio == Approx(1.0).epsilon(1e-9));
  }
  SUBCASE("J1 with the power-law base") {
    for (double a : {1.5, 1.9, 1.999}) CHECK(check_condition_E(kernel(KernelKind::J1), a).holds);
  }
  SUBCASE("a violator is flagged near the origin") {
    KernelParams p;
    p.kind = KernelKind::Violator;
    p.gamma = 0.5;
    KernelFamily k(p);
    const auto r = check_condition_E(k, 1.9);
    CHECK_FALSE(r.holds);
    CHECK(std::isfinite(r.worst_ratio));
    CHECK(r.witness_h.norm() < 1e-3);
  }
}

TEST_CASE("condition (L) tail integrals") {
  const auto j1 = kernel(KernelKind::J1);
  for (double a : {1.5, 1.9})
    CHECK(j1.tail_integral(a, 1.0) == Approx(fractional_constant(1, a) * 2.0 / a).epsilon(1e-10));
  const auto j2 = kernel(KernelKind::J2, 2);
  CHECK(j2.tail_integral(1.9, 1.0) == Approx(0.1 * 2.0 * std::numbers::pi).epsilon(1e-10));
  CHECK(kernel(KernelKind::J4).tail_integral(1.5, 1.0) == 0.0);
  const auto L = check_condition_L(j1, 1.0, {1.5, 1.9, 1.99, 1.999});
  CHECK(L.finite);
  CHECK(L.decreasing);
  CHECK(L.tends_to_zero);
}

TEST_CASE("kappa0") {
  CHECK(kappa0(kernel(KernelKind::J4), 1.2) == 0.0);
  CHECK(kappa0(kernel(KernelKind::Nu), 1.0) == 0.0);
  const auto j1 = kernel(KernelKind::J1);
  const double k0 = kappa0(j1, 1.0, 64);
  double grid_max = 0.0;
  for (int k = 1; k < 64; ++k) {
    const double a = 1.0 + k / 64.0;
    grid_max = std::max(grid_max, fractional_constant(1, a) * 2.0 / a);
  }
  CHECK(k0 == Approx(grid_max).epsilon(1e-8));
}

TEST_CASE("tilde nu") {
  const auto t = tilde_nu([](double r) { return std::pow(r, -2.0); }, 1, 1.0);
  CHECK(t.density(make_point(1.0)) == Approx(0.25));
  CHECK(t.mass == Approx(2.0).epsilon(1e-9));
  CHECK(t.bound_holds);
  CHECK_THROWS_AS(tilde_nu([](double r) { return r < 1.0 ? 1.0 : 0.0; }, 1, 1.0), std::domain_error);
}

TEST_CASE("almost decreasing") {
  CHECK(check_almost_decreasing(family(MollifierKind::PowerLaw), 0.1).holds);
  CHECK(check_almost_decreasing(family(MollifierKind::BoundedPoly, 2), 0.1).holds);
}
