#include "mosco/domain.hpp"

#include "mosco/kernel.hpp"
#include "mosco/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace mosco {

std::string to_string(Geometry g) {
  switch (g) {
    case Geometry::Interval:
      return "interval";
    case Geometry::Box:
      return "box";
    case Geometry::Polygon:
      return "polygon";
  }
  return "unknown";
}

Geometry geometry_from_string(const std::string& id) {
  if (id == "interval") return Geometry::Interval;
  if (id == "box") return Geometry::Box;
  if (id == "polygon") return Geometry::Polygon;
  throw std::invalid_argument("unknown geometry '" + id + "'");
}

std::string to_string(Basis b) { return b == Basis::P1 ? "p1" : "p0"; }

Basis basis_from_string(const std::string& id) {
  if (id == "p1") return Basis::P1;
  if (id == "p0") return Basis::P0;
  throw std::invalid_argument("unknown basis '" + id + "'");
}

std::string to_string(SpaceTag s) {
  switch (s) {
    case SpaceTag::HnuOmega:
      return "H_nu_on_Omega";
    case SpaceTag::VnuFull:
      return "V_nu_full";
    case SpaceTag::VnuZeroComplement:
      return "V_nu_zero_complement";
  }
  return "unknown";
}

namespace {

using Key = std::pair<int, int>;

// Row-major in (j, i) so that 1D grids read left to right.
bool key_less(const Key& a, const Key& b) {
  return a.second != b.second ? a.second < b.second : a.first < b.first;
}

bool on_grid_line(double v, double origin, double h) {
  const double f = (v - origin) / h;
  return std::abs(f - std::round(f)) < 1e-9;
}

bool point_in_polygon(const std::vector<std::array<double, 2>>& poly, double x, double y) {
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const double xi = poly[i][0], yi = poly[i][1];
    const double xj = poly[j][0], yj = poly[j][1];
    if ((yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi) inside = !inside;
  }
  return inside;
}

}  // namespace

Domain::Domain(const DomainSpec& spec) : spec_(spec) {
  const int d = spec.dim;
  if (d != 1 && d != 2) throw std::invalid_argument("domain dimension must be 1 or 2");
  if (spec.n < 1) throw std::invalid_argument("grid resolution must be positive");
  if (!(spec.tail_tol > 0.0)) throw std::invalid_argument("tail_tol must be positive");

  Point lo = Point::Zero(d), hi = Point::Zero(d);
  switch (spec.geometry) {
    case Geometry::Interval:
      if (d != 1 || spec.bounds.size() != 2) throw std::invalid_argument("interval geometry needs dim 1 and bounds {a, b}");
      lo(0) = spec.bounds[0];
      hi(0) = spec.bounds[1];
      break;
    case Geometry::Box:
      if (d != 2 || spec.bounds.size() != 4) throw std::invalid_argument("box geometry needs dim 2 and bounds {ax, bx, ay, by}");
      lo << spec.bounds[0], spec.bounds[2];
      hi << spec.bounds[1], spec.bounds[3];
      break;
    case Geometry::Polygon: {
      if (d != 2 || spec.vertices.size() < 4) throw std::invalid_argument("polygon geometry needs dim 2 and at least 4 vertices");
      lo = make_point(spec.vertices[0][0], spec.vertices[0][1]);
      hi = lo;
      for (const auto& v : spec.vertices) {
        lo(0) = std::min(lo(0), v[0]);
        lo(1) = std::min(lo(1), v[1]);
        hi(0) = std::max(hi(0), v[0]);
        hi(1) = std::max(hi(1), v[1]);
      }
      const std::size_t nv = spec.vertices.size();
      for (std::size_t k = 0; k < nv; ++k) {
        const auto& a = spec.vertices[k];
        const auto& b = spec.vertices[(k + 1) % nv];
        if (a[0] != b[0] && a[1] != b[1]) throw std::invalid_argument("polygon edges must be axis-aligned");
      }
      break;
    }
  }
  for (int k = 0; k < d; ++k) {
    if (!(hi(k) > lo(k))) throw std::invalid_argument("degenerate geometry");
  }
  origin_ = lo;
  spacing_ = (hi - lo) / spec.n;
  if (spec.geometry == Geometry::Polygon) {
    for (const auto& v : spec.vertices) {
      if (!on_grid_line(v[0], origin_(0), spacing_(0)) || !on_grid_line(v[1], origin_(1), spacing_(1)))
        throw std::invalid_argument("polygon vertices must lie on grid lines");
    }
  }
  if (!(spec.r_trunc > diameter())) throw std::invalid_argument("r_trunc must exceed diam(Omega)");

  // Omega cells, then collar cells with centre in B_R.
  std::vector<Key> omega_keys, collar_keys;
  std::array<int, 2> imin{0, 0}, imax{0, 0};
  for (int k = 0; k < d; ++k) {
    imin[k] = static_cast<int>(std::floor((-spec.r_trunc - origin_(k)) / spacing_(k))) - 1;
    imax[k] = static_cast<int>(std::ceil((spec.r_trunc - origin_(k)) / spacing_(k))) + 1;
  }
  const int jlo = d == 2 ? imin[1] : 0;
  const int jhi = d == 2 ? imax[1] : 0;
  for (int j = jlo; j <= jhi; ++j) {
    for (int i = imin[0]; i <= imax[0]; ++i) {
      Point centre(d);
      centre(0) = origin_(0) + (i + 0.5) * spacing_(0);
      if (d == 2) centre(1) = origin_(1) + (j + 0.5) * spacing_(1);
      const Key key{i, j};
      if (centre_in_omega(centre)) {
        omega_keys.push_back(key);
      } else if (centre.norm() < spec.r_trunc) {
        collar_keys.push_back(key);
      }
    }
  }
  std::sort(omega_keys.begin(), omega_keys.end(), key_less);
  std::sort(collar_keys.begin(), collar_keys.end(), key_less);
  omega_cells_ = static_cast<int>(omega_keys.size());
  if (omega_cells_ == 0) throw std::invalid_argument("domain has no cells");

  std::set<Key, decltype(&key_less)> closure(key_less), other(key_less);
  const int corners = 1 << d;
  auto node_key = [&](const Key& c, int local) {
    return Key{c.first + (local & 1), d == 2 ? c.second + ((local >> 1) & 1) : 0};
  };
  for (const auto& c : omega_keys)
    for (int l = 0; l < corners; ++l) closure.insert(node_key(c, l));
  for (const auto& c : collar_keys)
    for (int l = 0; l < corners; ++l)
      if (!closure.count(node_key(c, l))) other.insert(node_key(c, l));

  std::map<Key, int> node_id;
  auto add_node = [&](const Key& k) {
    Point p(d);
    p(0) = origin_(0) + k.first * spacing_(0);
    if (d == 2) p(1) = origin_(1) + k.second * spacing_(1);
    node_id[k] = static_cast<int>(nodes_.size());
    nodes_.push_back(p);
  };
  for (const auto& k : closure) add_node(k);
  closure_nodes_ = static_cast<int>(nodes_.size());
  for (const auto& k : other) add_node(k);

  std::set<Key> omega_set(omega_keys.begin(), omega_keys.end());
  auto add_cell = [&](const Key& key, bool in_omega) {
    Cell cell;
    cell.index = {key.first, key.second};
    cell.corner = Point(d);
    cell.corner(0) = origin_(0) + key.first * spacing_(0);
    if (d == 2) cell.corner(1) = origin_(1) + key.second * spacing_(1);
    cell.in_omega = in_omega;
    for (int l = 0; l < corners; ++l) cell.nodes.push_back(node_id.at(node_key(key, l)));
    cell_lookup_[key] = static_cast<int>(cells_.size());
    p0_dofs_.push_back({static_cast<int>(cells_.size())});
    cells_.push_back(std::move(cell));
  };
  for (const auto& k : omega_keys) add_cell(k, true);
  for (const auto& k : collar_keys) add_cell(k, false);

  boundary_.assign(nodes_.size(), false);
  for (const auto& [k, id] : node_id) {
    if (id >= closure_nodes_) continue;
    for (int l = 0; l < corners; ++l) {
      const Key c{k.first - 1 + (l & 1), d == 2 ? k.second - 1 + ((l >> 1) & 1) : 0};
      if (!omega_set.count(c)) boundary_[id] = true;
    }
  }

  if (d == 1) {
    int first = cells_.front().index[0], last = first;
    for (const auto& c : cells_) {
      first = std::min(first, c.index[0]);
      last = std::max(last, c.index[0]);
    }
    const double left = origin_(0) + first * spacing_(0);
    const double right = origin_(0) + (last + 1) * spacing_(0);
    coverage_ = std::min(lo(0) - left, right - hi(0));
  } else {
    coverage_ = spec.r_trunc - 0.5 * spacing_.norm() - containing_radius();
  }
  coverage_ = std::max(coverage_, 0.0);
}

bool Domain::centre_in_omega(const Point& c) const {
  switch (spec_.geometry) {
    case Geometry::Interval:
      return c(0) > spec_.bounds[0] && c(0) < spec_.bounds[1];
    case Geometry::Box:
      return c(0) > spec_.bounds[0] && c(0) < spec_.bounds[1] && c(1) > spec_.bounds[2] && c(1) < spec_.bounds[3];
    case Geometry::Polygon:
      return point_in_polygon(spec_.vertices, c(0), c(1));
  }
  return false;
}

double Domain::cell_volume() const { return spacing_.prod(); }

std::vector<int> Domain::interior_nodes() const {
  std::vector<int> out;
  for (int i = 0; i < closure_nodes_; ++i)
    if (!boundary_[i]) out.push_back(i);
  return out;
}

const std::vector<int>& Domain::cell_dofs(Basis b, int cell) const {
  return b == Basis::P1 ? cells_[cell].nodes : p0_dofs_[cell];
}

double Domain::measure() const { return omega_cells_ * cell_volume(); }

namespace {

std::vector<Point> hull_points(const DomainSpec& spec) {
  std::vector<Point> pts;
  if (spec.geometry == Geometry::Interval) {
    pts = {make_point(spec.bounds[0]), make_point(spec.bounds[1])};
  } else if (spec.geometry == Geometry::Box) {
    for (int a : {0, 1})
      for (int b : {2, 3}) pts.push_back(make_point(spec.bounds[a], spec.bounds[b]));
  } else {
    for (const auto& v : spec.vertices) pts.push_back(make_point(v[0], v[1]));
  }
  return pts;
}

}  // namespace

double Domain::diameter() const {
  const auto pts = hull_points(spec_);
  double diam = 0.0;
  for (const auto& p : pts)
    for (const auto& q : pts) diam = std::max(diam, (p - q).norm());
  return diam;
}

double Domain::containing_radius() const {
  double r = 0.0;
  for (const auto& p : hull_points(spec_)) r = std::max(r, p.norm());
  return r;
}

std::optional<int> Domain::cell_at(int i, int j) const {
  auto it = cell_lookup_.find({i, dim() == 2 ? j : 0});
  if (it == cell_lookup_.end()) return std::nullopt;
  return it->second;
}

namespace {

// Candidate lattice indices along one axis; a coordinate on a grid line belongs
// to both neighbouring cells.
std::vector<int> axis_candidates(double x, double origin, double h) {
  const double f = (x - origin) / h;
  const int i = static_cast<int>(std::floor(f));
  std::vector<int> out{i};
  if (std::abs(f - std::round(f)) < 1e-12) out.push_back(static_cast<int>(std::round(f)) - 1);
  return out;
}

}  // namespace

std::optional<int> Domain::locate(const Point& x) const {
  const auto ci = axis_candidates(x(0), origin_(0), spacing_(0));
  const auto cj = dim() == 2 ? axis_candidates(x(1), origin_(1), spacing_(1)) : std::vector<int>{0};
  for (int i : ci)
    for (int j : cj)
      if (auto c = cell_at(i, j)) return c;
  return std::nullopt;
}

bool Domain::contains(const Point& x) const {
  const auto ci = axis_candidates(x(0), origin_(0), spacing_(0));
  const auto cj = dim() == 2 ? axis_candidates(x(1), origin_(1), spacing_(1)) : std::vector<int>{0};
  for (int i : ci)
    for (int j : cj)
      if (auto c = cell_at(i, j); c && cells_[*c].in_omega) return true;
  return false;
}

std::vector<CellPair> Domain::region_pairs(Region region) const {
  std::vector<CellPair> pairs;
  const int second_begin = region == Region::OmegaOmega ? 0 : omega_cells_;
  const int second_end = region == Region::OmegaOmega ? omega_cells_ : static_cast<int>(cells_.size());
  pairs.reserve(static_cast<std::size_t>(omega_cells_) * (second_end - second_begin));
  for (int a = 0; a < omega_cells_; ++a) {
    for (int b = second_begin; b < second_end; ++b) {
      CellPair p{a, b, true, 0.0};
      double dist2 = 0.0;
      for (int k = 0; k < dim(); ++k) {
        const int di = std::abs(cells_[a].index[k] - cells_[b].index[k]);
        if (di > 1) {
          p.singular = false;
          const double gap = (di - 1) * spacing_(k);
          dist2 += gap * gap;
        }
      }
      p.distance = std::sqrt(dist2);
      pairs.push_back(p);
    }
  }
  return pairs;
}

Domain build_domain(const DomainSpec& spec) { return Domain(spec); }

double check_truncation(const Domain& domain, const KernelFamily& kernel, const std::vector<double>& alphas) {
  if (kernel.dim() != domain.dim()) throw std::invalid_argument("kernel and domain dimensions differ");
  double worst = 0.0;
  const double cov = domain.coverage();
  for (double a : alphas) {
    const double tail = cov > 0.0 ? kernel.tail_integral(a, cov) : kInf;
    worst = std::max(worst, tail);
    if (!(tail <= domain.tail_tol()))
      throw std::domain_error("r_trunc too small: kernel tail beyond the collar exceeds tail_tol");
  }
  return worst;
}

Eigen::VectorXd GridFunction::full_coeffs() const {
  const int n = domain->dof_count(basis);
  if (coeffs.size() == n) return coeffs;
  Eigen::VectorXd full = Eigen::VectorXd::Zero(n);
  full.head(coeffs.size()) = coeffs;
  return full;
}

void GridFunction::validate() const {
  if (!domain) throw std::logic_error("grid function without domain");
  const int expected = space == SpaceTag::HnuOmega ? domain->closure_dof_count(basis) : domain->dof_count(basis);
  if (coeffs.size() != expected) throw std::logic_error("coefficient count does not match the space");
  if (space == SpaceTag::VnuZeroComplement) {
    const int closure = domain->closure_dof_count(basis);
    for (int i = 0; i < coeffs.size(); ++i) {
      const bool outside = i >= closure || (basis == Basis::P1 && domain->is_boundary_node(i));
      if (outside && coeffs(i) != 0.0) throw std::logic_error("zero-complement function is nonzero outside Omega");
    }
  }
}

GridFunction sample_function(const Domain& domain, const ScalarField& u, SpaceTag space, Basis basis) {
  GridFunction g;
  g.domain = &domain;
  g.space = space;
  g.basis = basis;
  const int n = space == SpaceTag::HnuOmega ? domain.closure_dof_count(basis) : domain.dof_count(basis);
  g.coeffs.resize(n);
  for (int i = 0; i < n; ++i) {
    const bool outside = i >= domain.closure_dof_count(basis) || (basis == Basis::P1 && domain.is_boundary_node(i));
    if (space == SpaceTag::VnuZeroComplement && outside) {
      g.coeffs(i) = 0.0;
      continue;
    }
    if (basis == Basis::P1) {
      g.coeffs(i) = u(domain.nodes()[i]);
    } else {
      const auto& cell = domain.cells()[i];
      g.coeffs(i) = u(cell.corner + 0.5 * domain.spacing());
    }
  }
  return g;
}

std::optional<double> evaluate(const GridFunction& u, const Point& x) {
  const Domain& dom = *u.domain;
  const auto cell = dom.locate(x);
  if (!cell) return std::nullopt;
  if (u.space == SpaceTag::HnuOmega && !dom.cells()[*cell].in_omega) return std::nullopt;
  const Eigen::VectorXd c = u.full_coeffs();
  const auto& cl = dom.cells()[*cell];
  if (u.basis == Basis::P0) return c(*cell);
  const Point xi = ((x - cl.corner).array() / dom.spacing().array()).matrix();
  double value = 0.0;
  for (std::size_t l = 0; l < cl.nodes.size(); ++l) {
    double w = 1.0;
    for (int k = 0; k < dom.dim(); ++k) w *= ((l >> k) & 1) ? xi(k) : 1.0 - xi(k);
    value += w * c(cl.nodes[l]);
  }
  return value;
}

}  // namespace mosco
