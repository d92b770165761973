#pragma once

#include "mosco/domain.hpp"
#include "mosco/kernel.hpp"

#include <array>
#include <utility>
#include <vector>

namespace mosco {

struct PairQuadrature {
  int radial_order = 16;
  int angular_order = 12;
  int radial_order_low = 12;  // second, cheaper pass for the error estimate
  int angular_order_low = 8;
  int spatial_points = 2;    // per axis; exact for the polynomial x-integrand
  int spatial_points_modulated = 4;
};

// Merged local numbering for a cell pair (I, J): each entry is the local index
// in I and in J (or -1) of one distinct degree of freedom.
struct PairLayout {
  std::vector<std::pair<int, int>> merged;
};

PairLayout pair_layout(Basis basis, int dim, const std::array<int, 2>& offset);

struct PairMatrix {
  Eigen::MatrixXd value;  // merged x merged
  Eigen::MatrixXd error;  // |high - low| entrywise
};

// Integrates B_g(x, y) B_k(x, y) J^alpha(x, y) over I x J with
// B_g(x, y) = phi_g(x) - phi_g(y), where cell J sits at integer offset `offset`
// (in cells) from cell I whose lower corner is `corner`. The integral is taken in
// h = y - x; the h-box is split into 2^d pieces on which the x-integral is a
// polynomial in h, and every piece is integrated in polar coordinates about h = 0.
PairMatrix integrate_pair(const KernelFamily& kernel, double alpha, Basis basis,
                          const Point& spacing, const std::array<int, 2>& offset,
                          const Point& corner, const PairQuadrature& quad);

// Exponent q of the r^q Gauss-Jacobi weight used next to h = 0.
double pair_jacobi_exponent(const KernelFamily& kernel, double alpha, Basis basis);

}  // namespace mosco
