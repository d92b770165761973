#pragma once

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <vector>

namespace mosco {

/// Nodes and weights of a rule on the reference interval [-1, 1].
struct QuadratureRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

/// n-point Gauss-Legendre rule (Golub-Welsch). Cached; safe to call concurrently.
const QuadratureRule& gauss_legendre(int n);

/// n-point Gauss-Jacobi rule for the weight (1-x)^a (1+x)^b, a, b > -1.
/// Cached per (n, a, b); safe to call concurrently.
const QuadratureRule& gauss_jacobi(int n, double a, double b);

struct IntegrationResult {
  double value = 0.0;
  double error = 0.0;
  bool converged = false;
  int intervals = 0;
};

/// Globally adaptive Gauss-Kronrod (7/15) on a finite interval.
IntegrationResult integrate_adaptive(const std::function<double(double)>& f, double a,
                                     double b, double abs_tol = 1e-13,
                                     double rel_tol = 1e-12, int max_intervals = 4000);

/// Same as integrate_adaptive on [a, inf) through r = a + t / (1 - t).
IntegrationResult integrate_to_infinity(const std::function<double(double)>& f, double a,
                                        double abs_tol = 1e-13, double rel_tol = 1e-12,
                                        int max_intervals = 4000);

/// Describes how a radial integrand behaves: near r = 0 it is r^leading_exponent
/// times something smooth; it is smooth between consecutive breakpoints.
struct RadialHints {
  double leading_exponent = 0.0;
  std::vector<double> breakpoints;
};

/// Fixed-order integral of f over [lo, hi] using the hints. When lo == 0 the first
/// segment uses Gauss-Jacobi with weight r^q, q = hints.leading_exponent; other
/// segments use Gauss-Legendre and are graded geometrically when hi/lo is large.
/// hi may not be infinite.
double integrate_radial(const std::function<double(double)>& f, double lo, double hi,
                        const RadialHints& hints, int order);

/// Adaptive variant with error estimate; hi may be +inf.
IntegrationResult integrate_radial_adaptive(const std::function<double(double)>& f,
                                            double lo, double hi, const RadialHints& hints,
                                            double rel_tol = 1e-12);

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace mosco
