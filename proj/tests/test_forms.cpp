#include "mosco/forms.hpp"
#include "mosco/mosco_lab.hpp"

#include "oracle_values.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace mosco;
using doctest::Approx;

namespace {

DomainSpec interval(int n) {
  DomainSpec s;
  s.n = n;
  return s;
}

DomainSpec unit_square(int n) {
  DomainSpec s;
  s.dim = 2;
  s.geometry = Geometry::Box;
  s.bounds = {0.0, 1.0, 0.0, 1.0};
  s.n = n;
  return s;
}

KernelFamily nu_kernel(int dim = 1) {
  KernelParams p;
  p.base.dim = dim;
  return KernelFamily(p);
}

KernelFamily catalog(KernelKind kind, int dim) {
  KernelParams p;
  p.kind = kind;
  p.base.dim = dim;
  if (kind == KernelKind::J4) p.base.kind = MollifierKind::BoundedPoly;
  return KernelFamily(p);
}

double hat(const Point& x) { return std::max(0.0, 1.0 - 4.0 * std::abs(x(0) - 0.5)); }

}  // namespace

TEST_CASE("1D linear function: closed-form nonlocal energy") {
  Domain d(interval(8));
  const auto k = nu_kernel();
  const auto u = sample_function(d, [](const Point& x) { return x(0); }, SpaceTag::HnuOmega);
  for (double a : {1.5, 1.9, 1.99, 1.999}) {
    const auto r = eval_form_inner(k, a, u, u);
    CHECK(r.value == Approx(1.0 - (2.0 - a) / (3.0 - a)).epsilon(1e-10));
    CHECK(r.error_estimate < 1e-9);
  }
  CHECK(eval_form_inner(k, 1.9, u, u).value == Approx(0.9090909090909091).epsilon(1e-10));
}

TEST_CASE("hat function against brute-force quadrature") {
  Domain d(interval(4));
  const auto k = nu_kernel();
  const auto u = sample_function(d, hat, SpaceTag::VnuZeroComplement);
  SUBCASE("alpha 1.5") {
    const auto r = eval_form_full(k, 1.5, u, u);
    CHECK(r.inner_part == Approx(oracle::kHatInner1dAlpha15).epsilon(1e-9));
    CHECK(r.cross_part == Approx(oracle::kHatCross1dAlpha15).epsilon(1e-9));
    CHECK(r.value == Approx(oracle::kHatInner1dAlpha15 + 2.0 * oracle::kHatCross1dAlpha15).epsilon(1e-9));
  }
  SUBCASE("alpha 1.9") {
    const auto r = eval_form_full(k, 1.9, u, u);
    CHECK(r.inner_part == Approx(oracle::kHatInner1dAlpha19).epsilon(1e-9));
    CHECK(r.cross_part == Approx(oracle::kHatCross1dAlpha19).epsilon(1e-9));
  }
}

TEST_CASE("2D linear function against polar quadrature") {
  Domain d(unit_square(4));
  const auto k = nu_kernel(2);
  const auto u = sample_function(d, [](const Point& x) { return x(0); }, SpaceTag::HnuOmega);
  CHECK(eval_form_inner(k, 1.9, u, u).value == Approx(oracle::kLinearInner2dAlpha19).epsilon(1e-8));
  CHECK(eval_form_inner(k, 1.5, u, u).value == Approx(oracle::kLinearInner2dAlpha15).epsilon(1e-8));
}

TEST_CASE("constants have zero energy") {
  for (auto kind : {KernelKind::J1, KernelKind::J4, KernelKind::Nu}) {
    Domain d(interval(6));
    const auto k = catalog(kind, 1);
    const auto c = sample_function(d, [](const Point&) { return 3.0; });
    CHECK(std::abs(eval_form_inner(k, 1.8, c, c).value) < 1e-10);
    const auto zero = sample_function(d, [](const Point&) { return 0.0; });
    CHECK(eval_form_full(k, 1.8, zero, zero).value == 0.0);
  }
}

TEST_CASE("form algebra on random functions") {
  Domain d(unit_square(4));
  const auto k = catalog(KernelKind::J1, 2);
  NonlocalForm form(k, 1.7, d);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  auto rnd = [&] {
    GridFunction g{&d, Eigen::VectorXd(d.dof_count(Basis::P1)), SpaceTag::VnuFull, Basis::P1};
    for (int i = 0; i < g.coeffs.size(); ++i) g.coeffs[i] = U(rng);
    return g;
  };
  for (int t = 0; t < 5; ++t) {
    const auto u = rnd(), v = rnd();
    const auto uv = form.full(u, v), vu = form.full(v, u);
    CHECK(uv.value == vu.value);
    const auto uu = form.full(u, u), vv = form.full(v, v);
    CHECK(uu.value >= 0.0);
    CHECK(uv.value * uv.value <= uu.value * vv.value * (1.0 + 1e-12));
    CHECK(uu.value == Approx(form.inner(u, u).value + 2.0 * uu.cross_part).epsilon(1e-13));
    GridFunction w = u;
    w.coeffs = 2.0 * u.coeffs - v.coeffs;
    CHECK(form.full(w, u).value == Approx(2.0 * uu.value - vu.value).epsilon(1e-12));
  }
  const Eigen::MatrixXd full = form.full_matrix();
  CHECK((full - full.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(form.full(sample_function(d, hat, SpaceTag::HnuOmega), rnd()), std::invalid_argument);
}

TEST_CASE("P0 matrices are Markovian (alpha < 1 keeps jumps finite)") {
  Domain d(interval(8));
  const auto k = nu_kernel();
  NonlocalForm form(k, 0.8, d, Basis::P0);
  const Eigen::MatrixXd& K = form.inner_matrix();
  for (int i = 0; i < K.rows(); ++i) {
    CHECK(K.row(i).sum() == Approx(0.0).scale(K(i, i)).epsilon(1e-10));
    for (int j = 0; j < K.cols(); ++j)
      if (i != j) CHECK(K(i, j) <= 1e-14);
  }
}

TEST_CASE("translation-invariant pairs give a Toeplitz inner matrix") {
  Domain d(interval(8));
  const auto k = nu_kernel();
  NonlocalForm form(k, 1.8, d);
  const Eigen::MatrixXd& K = form.inner_matrix();
  // Interior nodes away from the boundary see identical neighbourhoods.
  auto node_at = [&](double x) {
    for (int i = 0; i < d.closure_node_count(); ++i)
      if (std::abs(d.nodes()[i](0) - x) < 1e-12) return i;
    return -1;
  };
  CHECK(K(node_at(0.375), node_at(0.5)) == Approx(K(node_at(0.5), node_at(0.625))).epsilon(1e-12));
}

TEST_CASE("energy of the hat equals the squared seminorm") {
  Domain d(interval(4));
  const auto k = nu_kernel();
  NonlocalForm form(k, 1.5, d);
  const auto h = sample_function(d, hat, SpaceTag::HnuOmega);
  const double s = seminorm_H_nu(form, h);
  CHECK(s * s == Approx(oracle::kHatInner1dAlpha15).epsilon(1e-9));
  const auto z = sample_function(d, hat, SpaceTag::VnuZeroComplement);
  const double v = seminorm_V_nu(form, z);
  CHECK(v * v == Approx(oracle::kHatInner1dAlpha15 + 2.0 * oracle::kHatCross1dAlpha15).epsilon(1e-9));
  const double l2 = l2_norm_omega(z);
  CHECK(l2 * l2 == Approx(1.0 / 6.0).epsilon(1e-12));
  const double triple = norm_V_nu_triple(form, z);
  CHECK(triple * triple == Approx(l2 * l2 + v * v).epsilon(1e-12));
  CHECK(norm_V_nu_full(form, z) == Approx(triple).epsilon(1e-12));
}

TEST_CASE("diffusion matrices") {
  SUBCASE("nu in 2D gives half the identity") {
    const auto m = second_moment(nu_kernel(2), 1.7, make_point(0.5, 0.5), 1.0);
    CHECK(m(0, 0) == Approx(0.5).epsilon(1e-10));
    CHECK(m(1, 1) == Approx(0.5).epsilon(1e-10));
    CHECK(std::abs(m(0, 1)) < 1e-12);
  }
  SUBCASE("J1 in 1D") {
    CHECK(second_moment(catalog(KernelKind::J1, 1), 1.9, make_point(0.5), 1.0)(0, 0) ==
          Approx(oracle::kJ1MomentAlpha19).epsilon(1e-10));
  }
  SUBCASE("J4 has a fixed second moment") {
    CHECK(second_moment(catalog(KernelKind::J4, 1), 1.9, make_point(0.5), 1.0)(0, 0) == Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(second_moment(catalog(KernelKind::J4, 2), 1.9, make_point(0.5, 0.5), 1.0)(0, 0) ==
          Approx(std::numbers::pi / 4.0).epsilon(1e-10));
  }
  SUBCASE("Cauchy diagnostics") {
    const auto dm = diffusion_matrix(nu_kernel(1), make_point(0.5), 1.0, {1.5, 1.9, 1.99, 1.999});
    CHECK(dm.converged);
    CHECK(dm.delta_consistent);
    CHECK(dm.A(0, 0) == Approx(1.0).epsilon(1e-10));
    const auto slow = diffusion_matrix(catalog(KernelKind::J1, 1), make_point(0.5), 1.0, {1.5, 1.9, 1.99, 1.999});
    CHECK_FALSE(slow.converged);
    CHECK_FALSE(slow.diagnostic.empty());
  }
}

TEST_CASE("ellipticity bounds") {
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(2, 2);
  CHECK(check_ellipticity(I, 2, 2.0, 1e-3).holds);
  CHECK_FALSE(check_ellipticity(3.0 * I, 2, 2.0, 1e-3).holds);
  KernelParams p;
  p.kind = KernelKind::Perturbed;
  p.base.dim = 2;
  p.lambda = 2.0;
  p.seed = 20240611;
  KernelFamily k(p);
  const auto A = second_moment(k, 1.999, make_point(0.3, 0.7), 1.0);
  CHECK(check_ellipticity(A, 2, 2.0, 1e-3).holds);
}

TEST_CASE("local form") {
  Domain d1(interval(8));
  const auto x = sample_function(d1, [](const Point& p) { return p(0); });
  CHECK(eval_form_local(Eigen::MatrixXd::Identity(1, 1), x, x) == Approx(1.0).epsilon(1e-13));
  Domain d2(unit_square(4));
  const auto s = sample_function(d2, [](const Point& p) { return p(0) + p(1); });
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(2, 2);
  CHECK(eval_form_local(I, s, s) == Approx(2.0).epsilon(1e-13));
  CHECK(eval_form_local(2.0 * I, s, s) == Approx(4.0).epsilon(1e-13));
  const Eigen::MatrixXd S = local_stiffness(d1, Eigen::MatrixXd::Identity(1, 1));
  const auto interior = d1.interior_nodes();
  const int a = interior[3];
  CHECK(S(a, a) == Approx(16.0));
  CHECK(S.row(a).sum() == Approx(0.0).scale(1.0));
  const Eigen::MatrixXd M = mass_matrix(d1, Basis::P1, true);
  CHECK(M.sum() == Approx(1.0).epsilon(1e-13));
}

TEST_CASE("boundedness by Lambda + 4 kappa0") {
  Domain d(unit_square(4));
  const int nc = d.closure_dof_count(Basis::P1);
  const Eigen::MatrixXd H1 = mass_matrix(d, Basis::P1, true).topLeftCorner(nc, nc) +
                             local_stiffness(d, Eigen::MatrixXd::Identity(2, 2));
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (auto kind : {KernelKind::J2, KernelKind::J4}) {
    const auto k = catalog(kind, 2);
    const double C = k.lambda() + 4.0 * kappa0(k, k.params().alpha0);
    NonlocalForm form(k, 1.9, d);
    for (int t = 0; t < 3; ++t) {
      GridFunction u{&d, Eigen::VectorXd(nc), SpaceTag::HnuOmega, Basis::P1};
      for (int i = 0; i < nc; ++i) u.coeffs[i] = U(rng);
      CHECK(form.inner(u, u).value <= C * u.coeffs.dot(H1 * u.coeffs));
    }
  }
}

TEST_CASE("smooth approximation") {
  DomainSpec s = interval(128);
  Domain d(s);
  const auto c = sample_function(d, [](const Point&) { return 2.0; });
  const auto cs = smooth_approximation(c, 0.05, make_point(1.0));
  CHECK((cs.coeffs.array() - 2.0).abs().maxCoeff() < 1e-12);
  const auto smooth = sample_function(d, [](const Point& x) { return std::sin(3.0 * x(0)); });
  double prev = 1e9;
  for (double eps : {0.1, 0.05, 0.025}) {
    const auto v = smooth_approximation(smooth, eps, make_point(1.0));
    const double err = l2_norm_omega(difference(v, smooth));
    CHECK(err < prev);
    prev = err;
  }
  CHECK_THROWS(smooth_approximation(smooth, 0.05, make_point(1.0), 1.0));
  CHECK_THROWS(smooth_approximation(smooth, -0.05, make_point(1.0)));
}

TEST_CASE("piecewise constants have infinite energy once alpha >= d") {
  Domain d(interval(8));
  const auto k = nu_kernel();
  CHECK_THROWS_AS(NonlocalForm(k, 1.6, d, Basis::P0), std::domain_error);
}
