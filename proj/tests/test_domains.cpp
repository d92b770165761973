#include "mosco/domain.hpp"
#include "mosco/kernel.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace mosco;
using doctest::Approx;

namespace {

DomainSpec interval(int n, double r_trunc = 2.0) {
  DomainSpec s;
  s.n = n;
  s.r_trunc = r_trunc;
  return s;
}

DomainSpec unit_square(int n, double r_trunc = 2.0) {
  DomainSpec s;
  s.dim = 2;
  s.geometry = Geometry::Box;
  s.bounds = {0.0, 1.0, 0.0, 1.0};
  s.n = n;
  s.r_trunc = r_trunc;
  return s;
}

}  // namespace

TEST_CASE("1D grid with collar") {
  Domain d(interval(4));
  CHECK(d.omega_cell_count() == 4);
  CHECK(d.closure_node_count() == 5);
  CHECK(d.interior_nodes().size() == 3);
  CHECK(d.measure() == Approx(1.0));
  for (int i = 0; i < d.closure_node_count(); ++i) {
    CHECK(d.nodes()[i](0) >= 0.0);
    CHECK(d.nodes()[i](0) <= 1.0);
  }
  double lo = 0.0, hi = 0.0;
  for (int i = d.closure_node_count(); i < d.node_count(); ++i) {
    const double x = d.nodes()[i](0);
    CHECK((x < 0.0 || x > 1.0));
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  CHECK(lo <= -2.0 + 0.25 + 1e-12);
  CHECK(hi >= 2.0 - 0.25 - 1e-12);
  CHECK(d.coverage() >= 1.0);
}

TEST_CASE("2D square n=2") {
  Domain d(unit_square(2));
  CHECK(d.closure_node_count() == 9);
  CHECK(d.interior_nodes().size() == 1);
  CHECK(d.collar_cell_count() > 0);
  CHECK(d.contains(make_point(0.5, 1.0)));
  CHECK_FALSE(d.contains(make_point(1.01, 0.5)));
  const auto c = d.locate(make_point(0.75, 0.25));
  REQUIRE(c);
  CHECK(d.cells()[*c].in_omega);
}

TEST_CASE("rectilinear polygon") {
  DomainSpec s;
  s.dim = 2;
  s.geometry = Geometry::Polygon;
  s.vertices = {{0, 0}, {1, 0}, {1, 0.5}, {0.5, 0.5}, {0.5, 1}, {0, 1}};
  s.n = 4;
  Domain d(s);
  CHECK(d.omega_cell_count() == 12);
  CHECK(d.measure() == Approx(0.75));
  CHECK_FALSE(d.contains(make_point(0.9, 0.9)));
}

TEST_CASE("cell pairs of a two-cell interval") {
  Domain d(interval(2));
  const auto pairs = d.region_pairs(Region::OmegaOmega);
  CHECK(pairs.size() == 4);
  CHECK(std::count_if(pairs.begin(), pairs.end(), [](const CellPair& p) { return p.singular; }) == 4);
  DomainSpec s = interval(4);
  Domain d4(s);
  const auto p4 = d4.region_pairs(Region::OmegaOmega);
  CHECK(p4.size() == 16);
  CHECK(std::count_if(p4.begin(), p4.end(), [](const CellPair& p) { return !p.singular; }) == 6);
  for (const auto& p : d4.region_pairs(Region::OmegaComplement)) {
    CHECK(d4.cells()[p.first].in_omega);
    CHECK_FALSE(d4.cells()[p.second].in_omega);
  }
}

TEST_CASE("truncation check") {
  KernelParams p;
  KernelFamily nu(p);
  Domain ok(interval(8, 2.0));
  CHECK(check_truncation(ok, nu, {1.5, 1.9}) == 0.0);
  KernelParams pj;
  pj.kind = KernelKind::J1;
  KernelFamily j1(pj);
  DomainSpec tight = interval(8, 1.05);
  tight.tail_tol = 1e-12;
  Domain small(tight);
  CHECK_THROWS_AS(check_truncation(small, j1, {1.5}), std::domain_error);
}

TEST_CASE("sampling") {
  Domain d(interval(4));
  const auto one = sample_function(d, [](const Point&) { return 1.0; });
  CHECK(one.coeffs.minCoeff() == 1.0);
  CHECK(one.coeffs.maxCoeff() == 1.0);
  const auto lin = sample_function(d, [](const Point& x) { return x(0); }, SpaceTag::HnuOmega);
  CHECK(lin.coeffs.size() == 5);
  std::vector<double> v(lin.coeffs.data(), lin.coeffs.data() + 5);
  std::sort(v.begin(), v.end());
  for (int i = 0; i < 5; ++i) CHECK(v[i] == Approx(0.25 * i));
  const auto bump = sample_function(d, [](const Point& x) {
    const double t = std::abs(x(0) - 0.5);
    return t < 0.4 ? std::exp(-1.0 / (1.0 - t * t / 0.16)) : 0.0;
  });
  CHECK(bump.coeffs.tail(d.node_count() - d.closure_node_count()).cwiseAbs().maxCoeff() == 0.0);
  const auto zero = sample_function(d, [](const Point&) { return 1.0; }, SpaceTag::VnuZeroComplement);
  CHECK(zero.coeffs.sum() == Approx(3.0));
  CHECK_NOTHROW(zero.validate());
  GridFunction broken = zero;
  broken.coeffs(d.node_count() - 1) = 1.0;
  CHECK_THROWS_AS(broken.validate(), std::logic_error);
  CHECK(*evaluate(lin, make_point(0.3)) == Approx(0.3));
  CHECK_FALSE(evaluate(lin, make_point(1.5)).has_value());
}

TEST_CASE("P0 degrees of freedom") {
  Domain d(unit_square(4));
  CHECK(d.dof_count(Basis::P0) == static_cast<int>(d.cells().size()));
  CHECK(d.closure_dof_count(Basis::P0) == 16);
  const auto g = sample_function(d, [](const Point& x) { return x(0) + x(1); }, SpaceTag::VnuFull, Basis::P0);
  CHECK(*evaluate(g, make_point(0.1, 0.1)) == Approx(0.25));
}
