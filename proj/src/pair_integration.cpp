#include "mosco/pair_integration.hpp"

#include "mosco/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mosco {

PairLayout pair_layout(Basis basis, int dim, const std::array<int, 2>& offset) {
  PairLayout layout;
  if (basis == Basis::P0) {
    const bool same = offset[0] == 0 && (dim == 1 || offset[1] == 0);
    if (same) {
      layout.merged = {{0, 0}};
    } else {
      layout.merged = {{0, -1}, {-1, 0}};
    }
    return layout;
  }
  const int nloc = 1 << dim;
  std::vector<bool> used(nloc, false);
  for (int l = 0; l < nloc; ++l) {
    int match = -1;
    for (int m = 0; m < nloc; ++m) {
      bool same = true;
      for (int k = 0; k < dim; ++k) {
        if (((l >> k) & 1) - ((m >> k) & 1) != offset[k]) same = false;
      }
      if (same) match = m;
    }
    if (match >= 0) used[match] = true;
    layout.merged.push_back({l, match});
  }
  for (int m = 0; m < nloc; ++m)
    if (!used[m]) layout.merged.push_back({-1, m});
  return layout;
}

double pair_jacobi_exponent(const KernelFamily& kernel, double alpha, Basis basis) {
  // B = O(|h|) for continuous bases, so the x-integral vanishes like |h|^2; for
  // P0 it only vanishes like the overlap length, O(|h|).
  const double m = basis == Basis::P1 ? 2.0 : 1.0;
  return m + kernel.leading_exponent(alpha) + kernel.dim() - 1.0;
}

namespace {

class PairIntegrator {
 public:
  PairIntegrator(const KernelFamily& kernel, double alpha, Basis basis, const Point& spacing,
                 const std::array<int, 2>& offset, const Point& corner, const PairQuadrature& quad)
      : kernel_(kernel), alpha_(alpha), basis_(basis), s_(spacing), corner_(corner), offset_(offset), quad_(quad) {
    d_ = kernel.dim();
    o_ = Point(d_);
    for (int k = 0; k < d_; ++k) o_(k) = offset[k] * s_(k);
    layout_ = pair_layout(basis, d_, offset);
    nm_ = static_cast<int>(layout_.merged.size());
    modulated_ = !kernel.translation_invariant();
    spatial_ = &gauss_legendre(modulated_ ? quad.spatial_points_modulated : quad.spatial_points);
    q_ = pair_jacobi_exponent(kernel, alpha, basis);
    if (!(q_ > -1.0)) throw std::domain_error("nonlocal form is infinite for this kernel and basis");
    support_ = kernel.support_radius(alpha);
    radii_ = kernel.breakpoints(alpha);
    if (std::isfinite(support_)) radii_.push_back(support_);
    std::sort(radii_.begin(), radii_.end());
    radii_.erase(std::unique(radii_.begin(), radii_.end()), radii_.end());
  }

  PairMatrix run() {
    // Cells further apart than the support never interact.
    double gap2 = 0.0;
    for (int k = 0; k < d_; ++k) {
      const double g = std::max(0.0, std::abs(o_(k)) - s_(k));
      gap2 += g * g;
    }
    PairMatrix out;
    out.value = Eigen::MatrixXd::Zero(nm_, nm_);
    out.error = Eigen::MatrixXd::Zero(nm_, nm_);
    if (std::sqrt(gap2) >= support_) return out;
    const Eigen::MatrixXd high = integrate(quad_.radial_order, quad_.angular_order);
    const Eigen::MatrixXd low = integrate(quad_.radial_order_low, quad_.angular_order_low);
    // Symmetrize so that assembled matrices are exactly symmetric.
    out.value = 0.5 * (high + high.transpose());
    out.error = (out.value - 0.5 * (low + low.transpose())).cwiseAbs();
    return out;
  }

 private:
  // G(h) = int over {x in I, x + h in J} of c(x, x + h) B B^T dx.
  //
  // Per axis the overlap {xi in [0, s], eta = xi + t in [0, s]} is written with
  // A = max(0, -t), C = max(0, t) and its length L, so that
  //   xi = A + p,  s - xi = C + m,  eta = C + p,  s - eta = A + m,
  // with p = L (1 + n) / 2 and m = L (1 - n) / 2. Differences of shape values
  // then never cancel, which matters next to h = 0 where the radial weights
  // are largest.
  void accumulate_x_integral(const Point& h, double weight, Eigen::MatrixXd& acc) const {
    double t[2] = {0.0, 0.0}, A[2] = {0.0, 0.0}, C[2] = {0.0, 0.0}, L[2] = {0.0, 0.0};
    for (int k = 0; k < d_; ++k) {
      const int off = offset_[k];
      const double s = s_(k);
      t[k] = h(k) - off * s;
      const double sp = h(k) - (off - 1) * s;  // s + t
      const double sm = (off + 1) * s - h(k);  // s - t
      L[k] = t[k] < 0.0 ? std::min(sp, s) : std::min(s, sm);
      if (!(L[k] > 0.0)) return;
      A[k] = std::max(0.0, -t[k]);
      C[k] = std::max(0.0, t[k]);
    }
    const auto& rule = *spatial_;
    const int np = static_cast<int>(rule.nodes.size());
    const int count = d_ == 1 ? np : np * np;
    Eigen::VectorXd B(nm_);
    double xi[2], cxi[2], eta[2], ceta[2], delta[2][2][2];
    for (int idx = 0; idx < count; ++idx) {
      const int ii[2] = {idx % np, idx / np};
      double w = weight;
      for (int k = 0; k < d_; ++k) {
        const double n = rule.nodes(ii[k]);
        const double p = 0.5 * L[k] * (1.0 + n);
        const double m = 0.5 * L[k] * (1.0 - n);
        const double s = s_(k);
        w *= 0.5 * L[k] * rule.weights(ii[k]);
        xi[k] = A[k] + p;
        cxi[k] = C[k] + m;
        eta[k] = C[k] + p;
        ceta[k] = A[k] + m;
        // delta[k][bx][by] = psi_bx(xi) - psi_by(eta), psi_0(u) = 1 - u/s, psi_1(u) = u/s.
        delta[k][0][0] = t[k] / s;
        delta[k][1][1] = -t[k] / s;
        delta[k][1][0] = L[k] * n / s;
        delta[k][0][1] = -L[k] * n / s;
      }
      auto psi_x = [&](int bit, int k) { return (bit ? xi[k] : cxi[k]) / s_(k); };
      auto psi_y = [&](int bit, int k) { return (bit ? eta[k] : ceta[k]) / s_(k); };
      for (int mm = 0; mm < nm_; ++mm) {
        const auto [li, lj] = layout_.merged[mm];
        if (basis_ == Basis::P0) {
          B(mm) = (li >= 0 ? 1.0 : 0.0) - (lj >= 0 ? 1.0 : 0.0);
        } else if (li >= 0 && lj >= 0) {
          if (d_ == 1) {
            B(mm) = delta[0][li & 1][lj & 1];
          } else {
            const int bx0 = li & 1, bx1 = (li >> 1) & 1, by0 = lj & 1, by1 = (lj >> 1) & 1;
            B(mm) = delta[0][bx0][by0] * psi_x(bx1, 1) + psi_y(by0, 0) * delta[1][bx1][by1];
          }
        } else if (li >= 0) {
          double v = 1.0;
          for (int k = 0; k < d_; ++k) v *= psi_x((li >> k) & 1, k);
          B(mm) = v;
        } else {
          double v = 1.0;
          for (int k = 0; k < d_; ++k) v *= psi_y((lj >> k) & 1, k);
          B(mm) = -v;
        }
      }
      if (modulated_) {
        Point x(d_);
        for (int k = 0; k < d_; ++k) x(k) = corner_(k) + xi[k];
        w *= kernel_.modulation(x, x + h);
      }
      acc.noalias() += w * B * B.transpose();
    }
  }

  // Integral along the ray r -> r u, r in [r0, r1], of r^{d-1} j(r) G(r u).
  void ray(const Point& u, double r0, double r1, int order, double weight, Eigen::MatrixXd& acc) const {
    r1 = std::min(r1, support_);
    if (!(r1 > r0)) return;
    std::vector<double> pts{r0};
    for (double r : radii_)
      if (r > r0 && r < r1) pts.push_back(r);
    pts.push_back(r1);
    const auto& legendre = gauss_legendre(order);
    auto eval = [&](double r, double w) {
      const double f = w * std::pow(r, d_ - 1.0) * kernel_.radial(alpha_, r);
      if (f != 0.0) accumulate_x_integral(r * u, f, acc);
    };
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
      const double a = pts[k];
      const double b = pts[k + 1];
      if (a == 0.0) {
        const auto& jac = gauss_jacobi(order, 0.0, q_);
        const double h = 0.5 * b;
        const double scale = std::pow(h, q_ + 1.0);
        for (Eigen::Index i = 0; i < jac.nodes.size(); ++i) {
          const double r = h * (1.0 + jac.nodes(i));
          eval(r, weight * scale * jac.weights(i) / std::pow(r, q_));
        }
        continue;
      }
      double left = a;
      while (left < b) {
        const double right = std::min(b, 3.0 * left);
        const double c = 0.5 * (left + right);
        const double h = 0.5 * (right - left);
        for (Eigen::Index i = 0; i < legendre.nodes.size(); ++i)
          eval(c + h * legendre.nodes(i), weight * h * legendre.weights(i));
        left = right;
      }
    }
  }

  void box_1d(double a, double b, int nr, Eigen::MatrixXd& acc) const {
    if (a >= 0.0) {
      ray(make_point(1.0), a, b, nr, 1.0, acc);
    } else if (b <= 0.0) {
      ray(make_point(-1.0), -b, -a, nr, 1.0, acc);
    } else {
      throw std::logic_error("origin inside an h-piece");
    }
  }

  void box_2d(const Point& a, const Point& b, int nr, int nt, Eigen::MatrixXd& acc) const {
    const double scale = (b - a).norm();
    std::vector<Point> corners = {a, make_point(b(0), a(1)), make_point(a(0), b(1)), b};
    bool origin_corner = false;
    for (const auto& c : corners)
      if (c.norm() <= 1e-13 * scale) origin_corner = true;
    if (!origin_corner && a(0) < 0.0 && b(0) > 0.0 && a(1) < 0.0 && b(1) > 0.0)
      throw std::logic_error("origin inside an h-piece");
    const Point centre = 0.5 * (a + b);
    const double tc = std::atan2(centre(1), centre(0));
    auto unwrap = [&](double y, double x) { return tc + std::remainder(std::atan2(y, x) - tc, 2.0 * std::numbers::pi); };
    std::vector<double> angles;
    for (const auto& c : corners)
      if (c.norm() > 1e-13 * scale) angles.push_back(unwrap(c(1), c(0)));
    const double tmin = *std::min_element(angles.begin(), angles.end());
    const double tmax = *std::max_element(angles.begin(), angles.end());
    for (double rho : radii_) {
      for (int axis = 0; axis < 2; ++axis) {
        for (double edge : {a(axis), b(axis)}) {
          if (std::abs(edge) >= rho) continue;
          const double other = std::sqrt(rho * rho - edge * edge);
          for (double v : {other, -other}) {
            const int o = 1 - axis;
            if (v < a(o) || v > b(o)) continue;
            angles.push_back(axis == 0 ? unwrap(v, edge) : unwrap(edge, v));
          }
        }
      }
    }
    std::sort(angles.begin(), angles.end());
    std::vector<double> cuts;
    for (double t : angles)
      if (t >= tmin && t <= tmax && (cuts.empty() || t - cuts.back() > 1e-13)) cuts.push_back(t);
    const auto& rule = gauss_legendre(nt);
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      const double c = 0.5 * (cuts[k] + cuts[k + 1]);
      const double h = 0.5 * (cuts[k + 1] - cuts[k]);
      for (Eigen::Index i = 0; i < rule.nodes.size(); ++i) {
        const double theta = c + h * rule.nodes(i);
        const Point u = make_point(std::cos(theta), std::sin(theta));
        // Slab intersection of the ray with the box.
        double r_in = 0.0, r_out = kInf;
        bool empty = false;
        for (int axis = 0; axis < 2; ++axis) {
          if (std::abs(u(axis)) < 1e-300) {
            if (a(axis) > 0.0 || b(axis) < 0.0) empty = true;
            continue;
          }
          double t1 = a(axis) / u(axis), t2 = b(axis) / u(axis);
          if (t1 > t2) std::swap(t1, t2);
          r_in = std::max(r_in, t1);
          r_out = std::min(r_out, t2);
        }
        if (origin_corner) r_in = 0.0;
        if (empty || !(r_out > r_in)) continue;
        ray(u, r_in, r_out, nr, h * rule.weights(i), acc);
      }
    }
  }

  Eigen::MatrixXd integrate(int nr, int nt) const {
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(nm_, nm_);
    if (d_ == 1) {
      box_1d(o_(0) - s_(0), o_(0), nr, acc);
      box_1d(o_(0), o_(0) + s_(0), nr, acc);
      return acc;
    }
    for (int piece = 0; piece < 4; ++piece) {
      Point a(2), b(2);
      for (int k = 0; k < 2; ++k) {
        const bool upper = (piece >> k) & 1;
        a(k) = upper ? o_(k) : o_(k) - s_(k);
        b(k) = upper ? o_(k) + s_(k) : o_(k);
      }
      box_2d(a, b, nr, nt, acc);
    }
    return acc;
  }

  const KernelFamily& kernel_;
  double alpha_;
  Basis basis_;
  Point s_;
  Point corner_;
  std::array<int, 2> offset_;
  PairQuadrature quad_;
  int d_ = 1;
  Point o_;
  PairLayout layout_;
  int nm_ = 0;
  bool modulated_ = false;
  const QuadratureRule* spatial_ = nullptr;
  double q_ = 0.0;
  double support_ = kInf;
  std::vector<double> radii_;
};

}  // namespace

PairMatrix integrate_pair(const KernelFamily& kernel, double alpha, Basis basis, const Point& spacing,
                          const std::array<int, 2>& offset, const Point& corner, const PairQuadrature& quad) {
  return PairIntegrator(kernel, alpha, basis, spacing, offset, corner, quad).run();
}

}  // namespace mosco
