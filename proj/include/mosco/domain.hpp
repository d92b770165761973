#pragma once

#include "mosco/types.hpp"

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mosco {

class KernelFamily;

enum class Geometry { Interval, Box, Polygon };

struct DomainSpec {
  int dim = 1;
  Geometry geometry = Geometry::Interval;
  std::vector<double> bounds = {0.0, 1.0};      // interval {a, b}; box {ax, bx, ay, by}
  std::vector<std::array<double, 2>> vertices;  // rectilinear polygon, counter-clockwise or not
  int n = 8;                                    // cells per axis across the bounding box
  double r_trunc = 2.0;
  double tail_tol = 1e-10;
};

std::string to_string(Geometry g);
Geometry geometry_from_string(const std::string& id);

enum class Basis { P1, P0 };
std::string to_string(Basis b);
Basis basis_from_string(const std::string& id);

enum class Region { OmegaOmega, OmegaComplement };

struct Cell {
  std::array<int, 2> index{0, 0};
  Point corner;  // lower-left corner
  bool in_omega = false;
  std::vector<int> nodes;  // 2^d node ids; bit k of the local index selects the upper side on axis k
};

struct CellPair {
  int first = 0;
  int second = 0;
  bool singular = false;  // the closed cells touch
  double distance = 0.0;  // Euclidean distance between the closed cells
};

// A uniform grid over an axis-aligned domain Omega together with a collar of
// complement cells whose centres lie in B_{r_trunc}(0). Omega-closure nodes
// come first in the node numbering and Omega cells first in the cell numbering.
class Domain {
 public:
  explicit Domain(const DomainSpec& spec);

  const DomainSpec& spec() const { return spec_; }
  int dim() const { return spec_.dim; }
  const Point& spacing() const { return spacing_; }
  double cell_volume() const;

  const std::vector<Cell>& cells() const { return cells_; }
  int omega_cell_count() const { return omega_cells_; }
  int collar_cell_count() const { return static_cast<int>(cells_.size()) - omega_cells_; }

  const std::vector<Point>& nodes() const { return nodes_; }
  int node_count() const { return static_cast<int>(nodes_.size()); }
  int closure_node_count() const { return closure_nodes_; }
  bool is_boundary_node(int node) const { return boundary_[node]; }
  // Nodes of Omega-closure that are not on the boundary.
  std::vector<int> interior_nodes() const;

  // Degrees of freedom for a basis: nodes for P1, cells for P0.
  int dof_count(Basis b) const { return b == Basis::P1 ? node_count() : static_cast<int>(cells_.size()); }
  int closure_dof_count(Basis b) const { return b == Basis::P1 ? closure_nodes_ : omega_cells_; }
  const std::vector<int>& cell_dofs(Basis b, int cell) const;

  double measure() const;                  // |Omega|
  double diameter() const;
  double containing_radius() const;        // max |x| over Omega
  double r_trunc() const { return spec_.r_trunc; }
  double tail_tol() const { return spec_.tail_tol; }
  // Every y with dist(y, Omega) < coverage() lies in a grid cell.
  double coverage() const { return coverage_; }
  bool contains(const Point& x) const;     // x in the closure of Omega

  // Cell containing x among all grid cells (Omega and collar), if any.
  std::optional<int> locate(const Point& x) const;
  std::optional<int> cell_at(int i, int j = 0) const;

  std::vector<CellPair> region_pairs(Region region) const;

 private:
  bool centre_in_omega(const Point& c) const;

  DomainSpec spec_;
  Point origin_;
  Point spacing_;
  std::vector<Cell> cells_;
  int omega_cells_ = 0;
  std::vector<Point> nodes_;
  int closure_nodes_ = 0;
  std::vector<bool> boundary_;
  std::vector<std::vector<int>> p0_dofs_;
  std::map<std::pair<int, int>, int> cell_lookup_;
  double coverage_ = 0.0;
};

Domain build_domain(const DomainSpec& spec);

// Throws std::domain_error when int_{|h| > coverage} J^alpha exceeds tail_tol for
// some alpha; returns the largest tail otherwise.
double check_truncation(const Domain& domain, const KernelFamily& kernel, const std::vector<double>& alphas);

enum class SpaceTag { HnuOmega, VnuFull, VnuZeroComplement };
std::string to_string(SpaceTag s);

struct GridFunction {
  const Domain* domain = nullptr;
  Eigen::VectorXd coeffs;
  SpaceTag space = SpaceTag::VnuFull;
  Basis basis = Basis::P1;

  // Coefficients extended to all dofs (zero beyond the stored ones).
  Eigen::VectorXd full_coeffs() const;
  // Throws std::logic_error if the invariants of the space tag are violated.
  void validate() const;
};

using ScalarField = std::function<double(const Point&)>;

// Nodal interpolation (P1) or cell-centre sampling (P0). For VnuZeroComplement
// every dof whose basis function reaches outside Omega is set to zero.
GridFunction sample_function(const Domain& domain, const ScalarField& u,
                             SpaceTag space = SpaceTag::VnuFull, Basis basis = Basis::P1);

// Value of the finite-element function at x; nullopt outside the grid.
std::optional<double> evaluate(const GridFunction& u, const Point& x);

}  // namespace mosco
