#include "mosco/mosco_lab.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace mosco;
using doctest::Approx;

namespace {

DomainSpec interval(int n) {
  DomainSpec s;
  s.n = n;
  return s;
}

KernelFamily nu_kernel() { return KernelFamily(KernelParams{}); }

VariationalProblem local_problem(const Domain& d, const GridFunction& f, ProblemSpace space) {
  VariationalProblem p;
  p.domain = &d;
  p.space = space;
  p.A = Eigen::MatrixXd::Identity(1, 1);
  p.source = f;
  return p;
}

}  // namespace

TEST_CASE("space identifiers") {
  for (auto s : {ProblemSpace::HnuOmega, ProblemSpace::VnuFull, ProblemSpace::VnuZeroComplement, ProblemSpace::H1,
                 ProblemSpace::H1Zero})
    CHECK(problem_space_from_string(to_string(s)) == s);
  CHECK(is_local(ProblemSpace::H1Zero));
  CHECK_FALSE(is_local(ProblemSpace::HnuOmega));
  CHECK_THROWS_AS(problem_space_from_string("L2"), std::invalid_argument);
  CHECK(mosco_pair_from_string("neumann") == MoscoPair::Neumann);
}

TEST_CASE("local P1 stiffness is the textbook tridiagonal matrix") {
  Domain d(interval(8));
  const auto f = sample_function(d, [](const Point&) { return 1.0; });
  auto p = local_problem(d, f, ProblemSpace::H1Zero);
  const auto sys = assemble(p);
  REQUIRE(sys.K.rows() == 7);
  for (int i = 0; i < 7; ++i) {
    const int a = sys.unknowns[i];
    for (int j = 0; j < 7; ++j) {
      const int b = sys.unknowns[j];
      const double dx = std::abs(d.nodes()[a](0) - d.nodes()[b](0));
      const double expected = dx < 1e-12 ? 16.0 : (std::abs(dx - 0.125) < 1e-12 ? -8.0 : 0.0);
      CHECK(sys.K(i, j) == Approx(expected).scale(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("local Dirichlet solve converges at second order") {
  double prev_err = 0.0;
  for (int n : {16, 32, 64}) {
    Domain d(interval(n));
    const auto f = sample_function(d, [](const Point&) { return 1.0; });
    const auto u = solve_resolvent(local_problem(d, f, ProblemSpace::H1Zero));
    double err = 0.0;
    for (int i = 0; i < d.closure_node_count(); ++i) {
      const double x = d.nodes()[i](0);
      const double exact = 1.0 - std::cosh(x - 0.5) / std::cosh(0.5);
      err = std::max(err, std::abs(u.coeffs(i) - exact));
    }
    CHECK(err <= 0.05 / (n * n));
    if (prev_err > 0.0) CHECK(prev_err / err > 3.5);
    prev_err = err;
  }
}

TEST_CASE("nonlocal systems are symmetric and positive") {
  Domain d(interval(16));
  const auto k = nu_kernel();
  const auto f = sample_function(d, [](const Point& x) { return std::sin(5.0 * x(0)); });
  std::mt19937_64 rng(4);
  std::normal_distribution<double> N;
  for (auto space : {ProblemSpace::HnuOmega, ProblemSpace::VnuFull, ProblemSpace::VnuZeroComplement}) {
    CAPTURE(to_string(space));
    VariationalProblem p;
    p.domain = &d;
    p.space = space;
    p.kernel = &k;
    p.alpha = 1.8;
    p.source = f;
    const auto sys = assemble(p);
    CHECK((sys.K - sys.K.transpose()).cwiseAbs().maxCoeff() == 0.0);
    for (int t = 0; t < 10; ++t) {
      Eigen::VectorXd v(sys.K.rows());
      for (auto& x : v) x = N(rng);
      CHECK(v.dot(sys.K * v) >= -1e-12 * v.squaredNorm());
    }
    const auto u = solve_resolvent(p);
    auto scaled = p;
    scaled.source.coeffs *= 3.0;
    const auto u3 = solve_resolvent(scaled);
    CHECK((u3.coeffs - 3.0 * u.coeffs).cwiseAbs().maxCoeff() < 1e-9);
    auto zero = p;
    zero.source.coeffs.setZero();
    CHECK(solve_resolvent(zero).coeffs.cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("hat function diagonal entry matches the seminorm") {
  Domain d(interval(4));
  const auto k = nu_kernel();
  VariationalProblem p;
  p.domain = &d;
  p.space = ProblemSpace::VnuZeroComplement;
  p.kernel = &k;
  p.alpha = 1.5;
  p.source = sample_function(d, [](const Point&) { return 1.0; });
  const auto sys = assemble(p);
  NonlocalForm form(k, 1.5, d);
  for (std::size_t i = 0; i < sys.unknowns.size(); ++i) {
    GridFunction phi{&d, Eigen::VectorXd::Zero(d.node_count()), SpaceTag::VnuZeroComplement, Basis::P1};
    phi.coeffs(sys.unknowns[i]) = 1.0;
    const double s = seminorm_V_nu(form, phi);
    CHECK(sys.K(i, i) == Approx(s * s).epsilon(1e-13));
  }
}

TEST_CASE("Dirichlet Mosco sweep") {
  Domain d(interval(64));
  const auto k = nu_kernel();
  const auto f = sample_function(d, [](const Point&) { return 1.0; });
  const auto r = mosco_sweep(f, k, {1.5, 1.9, 1.99, 1.999}, MoscoPair::Dirichlet);
  CHECK(r.complete);
  CHECK(r.decreasing);
  CHECK(r.final_below_tol);
  CHECK(r.A(0, 0) == Approx(1.0).epsilon(1e-10));
  const auto zero = sample_function(d, [](const Point&) { return 0.0; });
  const auto z = mosco_sweep(zero, k, {1.5, 1.9}, MoscoPair::Dirichlet);
  CHECK(z.l2_distance[0] == 0.0);
  CHECK(z.l2_distance[1] == 0.0);
}

TEST_CASE("Neumann Mosco sweep with a bounded kernel") {
  Domain d(interval(64));
  KernelParams p;
  p.kind = KernelKind::Nu;
  p.base.kind = MollifierKind::BoundedPoly;
  KernelFamily k(p);
  const auto f = sample_function(d, [](const Point& x) { return x(0) < 0.5 ? 1.0 : -0.5; });
  const auto r = mosco_sweep(f, k, {1.5, 1.9, 1.99, 1.999}, MoscoPair::Neumann);
  CHECK(r.complete);
  CHECK(r.decreasing);
}

TEST_CASE("Mosco sweep rejects kernels without condition (E)") {
  Domain d(interval(16));
  KernelParams p;
  p.kind = KernelKind::Violator;
  KernelFamily k(p);
  const auto f = sample_function(d, [](const Point&) { return 1.0; });
  CHECK_THROWS_AS(mosco_sweep(f, k, {1.5, 1.9}, MoscoPair::Dirichlet), std::domain_error);
}

TEST_CASE("limsup diagnostic") {
  Domain d(interval(32));
  KernelParams p;
  p.kind = KernelKind::J1;
  KernelFamily k(p);
  const Eigen::MatrixXd A = 2.0 * Eigen::MatrixXd::Identity(1, 1);
  const auto bump = sample_function(d, [](const Point& x) {
    const double t = (x(0) - 0.5) / 0.6;
    return std::abs(t) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - t * t)) : 0.0;
  });
  const auto r = limsup_diagnostic(bump, k, {1.5, 1.9, 1.99, 1.999}, A);
  CHECK(r.cross_decreasing);
  CHECK(r.gaps_decreasing);
  const auto zero = sample_function(d, [](const Point&) { return 0.0; });
  const auto z = limsup_diagnostic(zero, k, {1.5, 1.9}, A);
  CHECK(z.gaps[0] == 0.0);
  CHECK(z.gaps[1] == 0.0);
}

TEST_CASE("liminf diagnostic with oscillating sequence") {
  Domain d(interval(64));
  const auto k = nu_kernel();
  const std::vector<double> alphas{1.5, 1.9, 1.99, 1.999};
  const auto u = sample_function(d, [](const Point& x) { return x(0) * (1.0 - x(0)); }, SpaceTag::HnuOmega);
  std::vector<GridFunction> seq;
  for (std::size_t n = 0; n < alphas.size(); ++n) {
    const double amp = 0.05 / (n + 1.0);
    seq.push_back(sample_function(
        d, [&](const Point& x) { return x(0) * (1.0 - x(0)) + amp * std::sin(40.0 * x(0)); }, SpaceTag::HnuOmega));
  }
  const auto r = liminf_diagnostic(seq, u, k, alphas, Eigen::MatrixXd::Identity(1, 1));
  CHECK(r.jensen_holds);
  CHECK(r.liminf_holds);
  CHECK(r.omega_delta_cells > 0);
  CHECK(r.l2_to_limit.back() < r.l2_to_limit.front());
}
