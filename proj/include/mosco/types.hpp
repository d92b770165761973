#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace mosco {

/// A point or displacement in R^d for d in {1, 2}. Fixed maximum size, no heap.
using Point = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 2, 1>;

inline Point make_point(double x) {
  Point p(1);
  p << x;
  return p;
}

inline Point make_point(double x, double y) {
  Point p(2);
  p << x, y;
  return p;
}

/// Raised when a numerical procedure cannot deliver its result to the requested
/// accuracy (non-convergent quadrature, failed linear solve, non-SPD system).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mosco
