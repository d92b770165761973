#include "mosco/quadrature.hpp"

#include "mosco/types.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <queue>
#include <tuple>

namespace mosco {
namespace {

// Golub-Welsch: eigen-decomposition of the symmetric Jacobi matrix of the
// three-term recurrence.
QuadratureRule golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& offdiag_sq,
                            double mu0) {
  const Eigen::Index n = diag.size();
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    jacobi(i, i) = diag(i);
    if (i + 1 < n) {
      const double b = std::sqrt(offdiag_sq(i));
      jacobi(i, i + 1) = b;
      jacobi(i + 1, i) = b;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  QuadratureRule rule;
  rule.nodes = solver.eigenvalues();
  rule.weights = mu0 * solver.eigenvectors().row(0).transpose().array().square();
  return rule;
}

QuadratureRule make_jacobi(int n, double a, double b) {
  Eigen::VectorXd diag(n);
  Eigen::VectorXd off(std::max(n - 1, 0));
  const double ab = a + b;
  for (int k = 0; k < n; ++k) {
    const double s = 2.0 * k + ab;
    if (k == 0) {
      diag(k) = (b - a) / (ab + 2.0);
    } else {
      diag(k) = (b * b - a * a) / (s * (s + 2.0));
    }
  }
  for (int k = 1; k < n; ++k) {
    const double s = 2.0 * k + ab;
    off(k - 1) = 4.0 * k * (k + a) * (k + b) * (k + ab) / (s * s * (s + 1.0) * (s - 1.0));
  }
  const double mu0 = std::exp((ab + 1.0) * std::log(2.0) + std::lgamma(a + 1.0) +
                              std::lgamma(b + 1.0) - std::lgamma(ab + 2.0));
  return golub_welsch(diag, off, mu0);
}

// Gauss-Kronrod 7/15 abscissae and weights on [-1, 1] (QUADPACK qk15).
constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

Segment kronrod15(const std::function<double(double)>& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double sum = f(center - dx) + f(center + dx);
    kronrod += kWgk[j] * sum;
    if (j % 2 == 1) gauss += kWg[j / 2] * sum;
  }
  return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace

const QuadratureRule& gauss_legendre(int n) {
  return gauss_jacobi(n, 0.0, 0.0);
}

const QuadratureRule& gauss_jacobi(int n, double a, double b) {
  if (n < 1) throw std::invalid_argument("quadrature order must be positive");
  if (!(a > -1.0) || !(b > -1.0)) {
    throw std::domain_error("Gauss-Jacobi exponents must exceed -1");
  }
  static std::mutex mutex;
  static std::map<std::tuple<int, double, double>, QuadratureRule> cache;
  std::lock_guard lock(mutex);
  const auto key = std::make_tuple(n, a, b);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, make_jacobi(n, a, b)).first;
  return it->second;
}

IntegrationResult integrate_adaptive(const std::function<double(double)>& f, double a,
                                     double b, double abs_tol, double rel_tol,
                                     int max_intervals) {
  IntegrationResult result;
  if (a == b) {
    result.converged = true;
    return result;
  }
  std::priority_queue<Segment> queue;
  queue.push(kronrod15(f, a, b));
  double total = queue.top().value;
  double error = queue.top().error;
  int count = 1;
  while (error > std::max(abs_tol, rel_tol * std::abs(total)) && count < max_intervals) {
    const Segment worst = queue.top();
    queue.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) {
      queue.push(worst);
      break;
    }
    const Segment left = kronrod15(f, worst.a, mid);
    const Segment right = kronrod15(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    queue.push(left);
    queue.push(right);
    ++count;
  }
  // Resum to drop the drift of incremental updates.
  total = 0.0;
  error = 0.0;
  std::vector<Segment> parts;
  while (!queue.empty()) {
    parts.push_back(queue.top());
    queue.pop();
  }
  std::sort(parts.begin(), parts.end(), [](const Segment& l, const Segment& r) { return l.a < r.a; });
  for (const auto& s : parts) {
    total += s.value;
    error += s.error;
  }
  result.value = total;
  result.error = error;
  result.intervals = count;
  result.converged = std::isfinite(total) && error <= std::max(abs_tol, rel_tol * std::abs(total));
  return result;
}

IntegrationResult integrate_to_infinity(const std::function<double(double)>& f, double a,
                                        double abs_tol, double rel_tol, int max_intervals) {
  auto mapped = [&](double t) {
    if (t >= 1.0) return 0.0;
    const double s = 1.0 - t;
    return f(a + t / s) / (s * s);
  };
  return integrate_adaptive(mapped, 0.0, 1.0, abs_tol, rel_tol, max_intervals);
}

namespace {

std::vector<double> segment_points(double lo, double hi, const RadialHints& hints) {
  std::vector<double> points{lo};
  for (double p : hints.breakpoints) {
    if (p > lo && p < hi) points.push_back(p);
  }
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  points.push_back(hi);
  return points;
}

double legendre_on(const std::function<double(double)>& f, double a, double b, int order) {
  const auto& rule = gauss_legendre(order);
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < rule.nodes.size(); ++i) sum += rule.weights(i) * f(c + h * rule.nodes(i));
  return sum * h;
}

// Integral of f over [0, b] assuming f(r) = r^q g(r) with g smooth.
double jacobi_on(const std::function<double(double)>& f, double b, double q, int order) {
  if (q == 0.0) return legendre_on(f, 0.0, b, order);
  const auto& rule = gauss_jacobi(order, 0.0, q);
  const double h = 0.5 * b;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < rule.nodes.size(); ++i) {
    const double r = h * (1.0 + rule.nodes(i));
    sum += rule.weights(i) * f(r) / std::pow(r, q);
  }
  return sum * std::pow(h, q + 1.0);
}

}  // namespace

double integrate_radial(const std::function<double(double)>& f, double lo, double hi,
                        const RadialHints& hints, int order) {
  if (!(hi > lo)) return 0.0;
  if (!std::isfinite(hi)) throw std::invalid_argument("integrate_radial needs a finite upper limit");
  const auto points = segment_points(lo, hi, hints);
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < points.size(); ++k) {
    const double a = points[k];
    const double b = points[k + 1];
    if (a == 0.0) {
      total += jacobi_on(f, b, hints.leading_exponent, order);
      continue;
    }
    // Geometric grading keeps each piece at ratio <= 3.
    double left = a;
    while (left < b) {
      const double right = std::min(b, 3.0 * left);
      total += legendre_on(f, left, right, order);
      left = right;
    }
  }
  return total;
}

IntegrationResult integrate_radial_adaptive(const std::function<double(double)>& f, double lo,
                                            double hi, const RadialHints& hints,
                                            double rel_tol) {
  IntegrationResult total;
  total.converged = true;
  if (!(hi > lo)) return total;
  const bool infinite = !std::isfinite(hi);
  double proxy = std::max(lo, 1.0);
  for (double p : hints.breakpoints) proxy = std::max(proxy, p);
  proxy *= 2.0;
  // With an infinite range the last finite piece ends at the proxy and the
  // remainder goes through the mapped tail rule.
  const auto points = segment_points(lo, infinite ? proxy : hi, hints);
  auto add = [&](const IntegrationResult& r) {
    total.value += r.value;
    total.error += r.error;
    total.intervals += r.intervals;
    total.converged = total.converged && r.converged;
  };
  for (std::size_t k = 0; k + 1 < points.size(); ++k) {
    const double a = points[k];
    const double b = points[k + 1];
    if (a == 0.0 && hints.leading_exponent != 0.0) {
      // Jacobi on a shrinking first piece; Gauss-Kronrod on the rest.
      double cut = b;
      for (int level = 0; level < 40; ++level) {
        const double coarse = jacobi_on(f, cut, hints.leading_exponent, 24);
        const double fine = jacobi_on(f, cut, hints.leading_exponent, 48);
        const double err = std::abs(fine - coarse);
        if (err <= std::max(1e-15, rel_tol * std::abs(fine)) || level == 39) {
          add({fine, err, std::isfinite(fine) && err <= std::max(1e-15, 10 * rel_tol * std::abs(fine)), 1});
          break;
        }
        const double next = cut / 8.0;
        add(integrate_adaptive(f, next, cut, 1e-15, rel_tol));
        cut = next;
      }
      continue;
    }
    add(integrate_adaptive(f, a, b, 1e-15, rel_tol));
  }
  if (infinite) {
    add(integrate_to_infinity(f, points.back(), 1e-15, rel_tol));
  }
  return total;
}

}  // namespace mosco
