#include "mosco/forms.hpp"

#include "mosco/constants.hpp"
#include "mosco/parallel.hpp"
#include "mosco/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

namespace mosco {

namespace {

std::array<int, 2> cell_offset(const Cell& a, const Cell& b) {
  return {b.index[0] - a.index[0], b.index[1] - a.index[1]};
}

bool cells_touch(const Cell& a, const Cell& b) {
  return std::abs(a.index[0] - b.index[0]) <= 1 && std::abs(a.index[1] - b.index[1]) <= 1;
}

double cell_gap(const Domain& dom, const Cell& a, const Cell& b) {
  double g2 = 0.0;
  for (int k = 0; k < dom.dim(); ++k) {
    const int di = std::abs(a.index[k] - b.index[k]);
    if (di > 1) g2 += std::pow((di - 1) * dom.spacing()(k), 2);
  }
  return std::sqrt(g2);
}

int merged_dof(const Domain& dom, Basis basis, int first, int second, const std::pair<int, int>& m) {
  return m.first >= 0 ? dom.cell_dofs(basis, first)[m.first] : dom.cell_dofs(basis, second)[m.second];
}

void require_same_space(const NonlocalForm& form, const GridFunction& u) {
  if (u.domain != &form.domain()) throw std::invalid_argument("grid function lives on a different domain");
  if (u.basis != form.basis()) throw std::invalid_argument("grid function uses a different basis");
}

}  // namespace

NonlocalForm::NonlocalForm(const KernelFamily& kernel, double alpha, const Domain& domain, Basis basis,
                           const QuadOptions& options)
    : kernel_(kernel), alpha_(alpha), domain_(domain), basis_(basis), options_(options) {
  if (kernel.dim() != domain.dim()) throw std::invalid_argument("kernel and domain dimensions differ");
  if (!(alpha > 0.0 && alpha < 2.0)) throw std::domain_error("alpha must lie in (0, 2)");
  if (!(pair_jacobi_exponent(kernel, alpha, basis) > -1.0))
    throw std::domain_error("nonlocal form is infinite for this kernel and basis");
}

const PairMatrix& NonlocalForm::pair(int first, int second) {
  const auto& a = domain_.cells()[first];
  const auto& b = domain_.cells()[second];
  if (kernel_.translation_invariant()) {
    const auto off = cell_offset(a, b);
    auto it = offset_cache_.find(off);
    if (it == offset_cache_.end())
      it = offset_cache_.emplace(off, integrate_pair(kernel_, alpha_, basis_, domain_.spacing(), off, a.corner, options_.pair)).first;
    return it->second;
  }
  const auto key = std::make_pair(first, second);
  auto it = pair_cache_.find(key);
  if (it == pair_cache_.end())
    it = pair_cache_.emplace(key, integrate_pair(kernel_, alpha_, basis_, domain_.spacing(), cell_offset(a, b), a.corner, options_.pair)).first;
  return it->second;
}

NonlocalForm::Assembled NonlocalForm::assemble(Region region) {
  const auto& cells = domain_.cells();
  const int n_omega = domain_.omega_cell_count();
  const int n_cells = static_cast<int>(cells.size());
  const double support = kernel_.support_radius(alpha_);

  struct Job {
    int first, second;
    double factor;
  };
  std::vector<Job> jobs;
  for (int a = 0; a < n_omega; ++a) {
    const int b0 = region == Region::OmegaOmega ? a : n_omega;
    const int b1 = region == Region::OmegaOmega ? n_omega : n_cells;
    for (int b = b0; b < b1; ++b) {
      if (cell_gap(domain_, cells[a], cells[b]) >= support) continue;
      // Unordered Omega x Omega pairs stand for both orders.
      jobs.push_back({a, b, region == Region::OmegaOmega && a != b ? 2.0 : 1.0});
    }
  }

  // Compute missing pair integrals in parallel, then insert in a fixed order.
  if (kernel_.translation_invariant()) {
    std::vector<std::array<int, 2>> todo;
    std::vector<int> rep;
    std::set<std::array<int, 2>> seen;
    for (const auto& j : jobs) {
      const auto off = cell_offset(cells[j.first], cells[j.second]);
      if (offset_cache_.count(off) || seen.count(off)) continue;
      seen.insert(off);
      todo.push_back(off);
      rep.push_back(j.first);
    }
    std::vector<PairMatrix> results(todo.size());
    parallel_for(todo.size(), [&](std::size_t i) {
      results[i] = integrate_pair(kernel_, alpha_, basis_, domain_.spacing(), todo[i], cells[rep[i]].corner, options_.pair);
    }, options_.jobs);
    for (std::size_t i = 0; i < todo.size(); ++i) offset_cache_.emplace(todo[i], std::move(results[i]));
  } else {
    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < jobs.size(); ++i)
      if (!pair_cache_.count({jobs[i].first, jobs[i].second})) todo.push_back(i);
    std::vector<PairMatrix> results(todo.size());
    parallel_for(todo.size(), [&](std::size_t i) {
      const auto& j = jobs[todo[i]];
      results[i] = integrate_pair(kernel_, alpha_, basis_, domain_.spacing(), cell_offset(cells[j.first], cells[j.second]),
                                  cells[j.first].corner, options_.pair);
    }, options_.jobs);
    for (std::size_t i = 0; i < todo.size(); ++i)
      pair_cache_.emplace(std::make_pair(jobs[todo[i]].first, jobs[todo[i]].second), std::move(results[i]));
  }

  const int n = region == Region::OmegaOmega ? domain_.closure_dof_count(basis_) : domain_.dof_count(basis_);
  Assembled out;
  out.value = Eigen::MatrixXd::Zero(n, n);
  out.error = Eigen::MatrixXd::Zero(n, n);
  std::vector<Eigen::Triplet<double>> singular;
  for (const auto& j : jobs) {
    const PairMatrix& pm = pair(j.first, j.second);
    const auto layout = pair_layout(basis_, domain_.dim(), cell_offset(cells[j.first], cells[j.second]));
    const bool touch = cells_touch(cells[j.first], cells[j.second]);
    const int nm = static_cast<int>(layout.merged.size());
    for (int p = 0; p < nm; ++p) {
      const int gp = merged_dof(domain_, basis_, j.first, j.second, layout.merged[p]);
      for (int q = 0; q < nm; ++q) {
        const int gq = merged_dof(domain_, basis_, j.first, j.second, layout.merged[q]);
        out.value(gp, gq) += j.factor * pm.value(p, q);
        out.error(gp, gq) += j.factor * pm.error(p, q);
        if (touch) singular.emplace_back(gp, gq, j.factor * pm.value(p, q));
      }
    }
  }
  out.singular.resize(n, n);
  out.singular.setFromTriplets(singular.begin(), singular.end());
  return out;
}

void NonlocalForm::ensure_inner() {
  if (!inner_) inner_ = assemble(Region::OmegaOmega);
}

void NonlocalForm::ensure_cross() {
  if (!cross_) cross_ = assemble(Region::OmegaComplement);
}

const Eigen::MatrixXd& NonlocalForm::inner_matrix() {
  ensure_inner();
  return inner_->value;
}

const Eigen::MatrixXd& NonlocalForm::cross_matrix() {
  ensure_cross();
  return cross_->value;
}

Eigen::MatrixXd NonlocalForm::full_matrix() {
  ensure_inner();
  ensure_cross();
  Eigen::MatrixXd full = 2.0 * cross_->value;
  const int nc = static_cast<int>(inner_->value.rows());
  full.topLeftCorner(nc, nc) += inner_->value;
  return full;
}

double NonlocalForm::truncation_tail() {
  if (!tail_) {
    const double cov = domain_.coverage();
    tail_ = cov >= kernel_.support_radius(alpha_) ? 0.0 : (cov > 0.0 ? kernel_.tail_integral(alpha_, cov) : kInf);
  }
  return *tail_;
}

namespace {

// Exactly symmetric evaluation of u^T K v for symmetric K.
double symmetric_product(const Eigen::MatrixXd& K, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  double sum = 0.0;
  const Eigen::Index n = K.rows();
  for (Eigen::Index b = 0; b < n; ++b) {
    sum += K(b, b) * (u(b) * v(b));
    double col = 0.0;
    for (Eigen::Index a = 0; a < b; ++a) col += K(a, b) * (u(a) * v(b) + u(b) * v(a));
    sum += col;
  }
  return sum;
}

double sparse_product(const Eigen::SparseMatrix<double>& S, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  return u.dot(S * v);
}

void check_error(const FormReport& r, double tol) {
  if (!(r.error_estimate <= tol * std::max(1.0, std::abs(r.value))) || !std::isfinite(r.value))
    throw NumericalError("form quadrature error estimate exceeds quad_tol");
}

}  // namespace

FormReport NonlocalForm::inner(const GridFunction& u, const GridFunction& v) {
  require_same_space(*this, u);
  require_same_space(*this, v);
  ensure_inner();
  const int nc = domain_.closure_dof_count(basis_);
  const Eigen::VectorXd uc = u.full_coeffs().head(nc);
  const Eigen::VectorXd vc = v.full_coeffs().head(nc);
  FormReport r;
  r.value = symmetric_product(inner_->value, uc, vc);
  r.inner_part = r.value;
  r.error_estimate = uc.cwiseAbs().dot(inner_->error * vc.cwiseAbs());
  r.singular_part = sparse_product(inner_->singular, uc, vc);
  r.regular_part = r.value - r.singular_part;
  check_error(r, options_.quad_tol);
  return r;
}

FormReport NonlocalForm::full(const GridFunction& u, const GridFunction& v) {
  if (u.space == SpaceTag::HnuOmega || v.space == SpaceTag::HnuOmega)
    throw std::invalid_argument("the full form needs values on the complement");
  FormReport in = inner(u, v);
  ensure_cross();
  const Eigen::VectorXd uf = u.full_coeffs();
  const Eigen::VectorXd vf = v.full_coeffs();
  FormReport r;
  r.inner_part = in.value;
  r.cross_part = symmetric_product(cross_->value, uf, vf);
  r.value = r.inner_part + 2.0 * r.cross_part;
  r.error_estimate = in.error_estimate + 2.0 * uf.cwiseAbs().dot(cross_->error * vf.cwiseAbs());
  r.singular_part = in.singular_part + 2.0 * sparse_product(cross_->singular, uf, vf);
  r.regular_part = r.value - r.singular_part;
  const double tail = truncation_tail();
  r.tail_bound = tail == 0.0 ? 0.0 : 8.0 * uf.lpNorm<Eigen::Infinity>() * vf.lpNorm<Eigen::Infinity>() * domain_.measure() * tail;
  check_error(r, options_.quad_tol);
  return r;
}

double NonlocalForm::energy_on_cells(const std::vector<int>& subset, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  const auto& cells = domain_.cells();
  const double support = kernel_.support_radius(alpha_);
  double sum = 0.0;
  for (std::size_t i = 0; i < subset.size(); ++i) {
    for (std::size_t k = i; k < subset.size(); ++k) {
      const int a = subset[i];
      const int b = subset[k];
      if (cell_gap(domain_, cells[a], cells[b]) >= support) continue;
      const PairMatrix& pm = pair(a, b);
      const auto layout = pair_layout(basis_, domain_.dim(), cell_offset(cells[a], cells[b]));
      const int nm = static_cast<int>(layout.merged.size());
      Eigen::VectorXd ul(nm), vl(nm);
      for (int p = 0; p < nm; ++p) {
        const int g = merged_dof(domain_, basis_, a, b, layout.merged[p]);
        ul(p) = u(g);
        vl(p) = v(g);
      }
      sum += (a == b ? 1.0 : 2.0) * ul.dot(pm.value * vl);
    }
  }
  return sum;
}

FormReport eval_form_inner(const KernelFamily& f, double alpha, const GridFunction& u, const GridFunction& v,
                           const QuadOptions& options) {
  NonlocalForm form(f, alpha, *u.domain, u.basis, options);
  return form.inner(u, v);
}

FormReport eval_form_full(const KernelFamily& f, double alpha, const GridFunction& u, const GridFunction& v,
                          const QuadOptions& options) {
  NonlocalForm form(f, alpha, *u.domain, u.basis, options);
  return form.full(u, v);
}

namespace {

double q1_shape(int local, const Point& xi, const Point& s) {
  double v = 1.0;
  for (int k = 0; k < xi.size(); ++k) {
    const double u = xi(k) / s(k);
    v *= ((local >> k) & 1) ? u : 1.0 - u;
  }
  return v;
}

Point q1_gradient(int local, const Point& xi, const Point& s) {
  const int d = static_cast<int>(xi.size());
  Point g(d);
  for (int k = 0; k < d; ++k) {
    double v = (((local >> k) & 1) ? 1.0 : -1.0) / s(k);
    for (int j = 0; j < d; ++j) {
      if (j == k) continue;
      const double u = xi(j) / s(j);
      v *= ((local >> j) & 1) ? u : 1.0 - u;
    }
    g(k) = v;
  }
  return g;
}

// Tensor Gauss points on [0, s]^d with two points per axis.
std::vector<std::pair<Point, double>> cell_points(const Point& s) {
  const auto& rule = gauss_legendre(2);
  const int d = static_cast<int>(s.size());
  std::vector<std::pair<Point, double>> pts;
  const int count = d == 1 ? 2 : 4;
  for (int idx = 0; idx < count; ++idx) {
    Point xi(d);
    double w = 1.0;
    for (int k = 0; k < d; ++k) {
      const int i = k == 0 ? idx % 2 : idx / 2;
      xi(k) = 0.5 * s(k) * (1.0 + rule.nodes(i));
      w *= 0.5 * s(k) * rule.weights(i);
    }
    pts.emplace_back(xi, w);
  }
  return pts;
}

}  // namespace

Eigen::MatrixXd mass_matrix(const Domain& domain, Basis basis, bool omega_only) {
  const int n = domain.dof_count(basis);
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  const int ncells = omega_only ? domain.omega_cell_count() : static_cast<int>(domain.cells().size());
  if (basis == Basis::P0) {
    for (int c = 0; c < ncells; ++c) M(c, c) = domain.cell_volume();
    return M;
  }
  const auto pts = cell_points(domain.spacing());
  const int nloc = 1 << domain.dim();
  Eigen::MatrixXd local = Eigen::MatrixXd::Zero(nloc, nloc);
  for (const auto& [xi, w] : pts)
    for (int a = 0; a < nloc; ++a)
      for (int b = 0; b < nloc; ++b) local(a, b) += w * q1_shape(a, xi, domain.spacing()) * q1_shape(b, xi, domain.spacing());
  for (int c = 0; c < ncells; ++c) {
    const auto& nodes = domain.cells()[c].nodes;
    for (int a = 0; a < nloc; ++a)
      for (int b = 0; b < nloc; ++b) M(nodes[a], nodes[b]) += local(a, b);
  }
  return M;
}

Eigen::MatrixXd local_stiffness(const Domain& domain, const Eigen::MatrixXd& A) {
  const int d = domain.dim();
  if (A.rows() != d || A.cols() != d) throw std::invalid_argument("diffusion matrix has the wrong size");
  const int n = domain.closure_node_count();
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
  const auto pts = cell_points(domain.spacing());
  const int nloc = 1 << d;
  Eigen::MatrixXd local = Eigen::MatrixXd::Zero(nloc, nloc);
  for (const auto& [xi, w] : pts) {
    for (int a = 0; a < nloc; ++a) {
      const Point ga = q1_gradient(a, xi, domain.spacing());
      for (int b = 0; b < nloc; ++b) local(a, b) += w * ga.dot(A * q1_gradient(b, xi, domain.spacing()));
    }
  }
  for (int c = 0; c < domain.omega_cell_count(); ++c) {
    const auto& nodes = domain.cells()[c].nodes;
    for (int a = 0; a < nloc; ++a)
      for (int b = 0; b < nloc; ++b) K(nodes[a], nodes[b]) += local(a, b);
  }
  return K;
}

double l2_norm_omega(const GridFunction& u) {
  const Eigen::VectorXd c = u.full_coeffs();
  return std::sqrt(std::max(0.0, c.dot(mass_matrix(*u.domain, u.basis, true) * c)));
}

double l2_norm_all(const GridFunction& u) {
  const Eigen::VectorXd c = u.full_coeffs();
  return std::sqrt(std::max(0.0, c.dot(mass_matrix(*u.domain, u.basis, false) * c)));
}

double seminorm_H_nu(NonlocalForm& form, const GridFunction& u) {
  return std::sqrt(std::max(0.0, form.inner(u, u).value));
}

double norm_H_nu(NonlocalForm& form, const GridFunction& u) {
  const double s = seminorm_H_nu(form, u);
  const double l2 = l2_norm_omega(u);
  return std::sqrt(l2 * l2 + s * s);
}

double seminorm_V_nu(NonlocalForm& form, const GridFunction& u) {
  return std::sqrt(std::max(0.0, form.full(u, u).value));
}

double norm_V_nu_full(NonlocalForm& form, const GridFunction& u) {
  const double s = seminorm_V_nu(form, u);
  const double l2 = l2_norm_all(u);
  return std::sqrt(l2 * l2 + s * s);
}

double norm_V_nu_triple(NonlocalForm& form, const GridFunction& u) {
  const double s = seminorm_V_nu(form, u);
  const double l2 = l2_norm_omega(u);
  return std::sqrt(l2 * l2 + s * s);
}

Eigen::MatrixXd second_moment(const KernelFamily& f, double alpha, const Point& x, double delta, double* error) {
  if (!(delta > 0.0)) throw std::domain_error("delta must be positive");
  const int d = f.dim();
  if (x.size() != d) throw std::invalid_argument("point dimension does not match kernel");
  const double top = std::min(delta, f.support_radius(alpha));
  RadialHints hints;
  hints.leading_exponent = f.leading_exponent(alpha) + d + 1.0;
  hints.breakpoints = f.breakpoints(alpha);
  if (!(hints.leading_exponent > -1.0)) throw std::domain_error("second moment diverges at the origin");
  if (f.translation_invariant()) {
    auto g = [&](double r) { return r == 0.0 ? 0.0 : std::pow(r, d + 1.0) * f.radial(alpha, r); };
    const auto res = integrate_radial_adaptive(g, 0.0, top, hints, 1e-12);
    if (!res.converged) throw NumericalError("second moment did not converge");
    const double scale = sphere_area(d) / d;
    if (error) *error = scale * res.error;
    return scale * res.value * Eigen::MatrixXd::Identity(d, d);
  }
  // Modulated kernels: angular Gauss-Legendre around the circle, fixed-order
  // radial rule per direction, evaluated at two orders for the error.
  auto moment = [&](int order) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(d, d);
    if (d == 1) {
      for (double sign : {1.0, -1.0}) {
        auto g = [&](double r) { return std::pow(r, 2.0) * f.radial(alpha, r) * f.modulation(x, x + make_point(sign * r)); };
        A(0, 0) += integrate_radial(g, 0.0, top, hints, order);
      }
      return A;
    }
    const auto& rule = gauss_legendre(order);
    const int pieces = 8;
    for (int p = 0; p < pieces; ++p) {
      const double a = 2.0 * std::numbers::pi * p / pieces;
      const double h = std::numbers::pi / pieces;
      for (Eigen::Index i = 0; i < rule.nodes.size(); ++i) {
        const double theta = a + h * (1.0 + rule.nodes(i));
        const Point u = make_point(std::cos(theta), std::sin(theta));
        auto g = [&](double r) { return std::pow(r, 3.0) * f.radial(alpha, r) * f.modulation(x, x + r * u); };
        A += h * rule.weights(i) * integrate_radial(g, 0.0, top, hints, order) * (u * u.transpose());
      }
    }
    return A;
  };
  const Eigen::MatrixXd high = moment(32);
  const Eigen::MatrixXd low = moment(20);
  if (error) *error = (high - low).cwiseAbs().maxCoeff();
  return high;
}

DiffusionMatrix diffusion_matrix(const KernelFamily& f, const Point& x, double delta, const std::vector<double>& alphas,
                                 double matrix_tol) {
  if (alphas.empty()) throw std::invalid_argument("alpha sweep is empty");
  for (std::size_t k = 1; k < alphas.size(); ++k)
    if (!(alphas[k] > alphas[k - 1])) throw std::invalid_argument("alpha sweep must be increasing");
  DiffusionMatrix out;
  out.delta = delta;
  out.alphas = alphas;
  out.matrix_tol = matrix_tol;
  for (double a : alphas) {
    double err = 0.0;
    out.per_alpha.push_back(second_moment(f, a, x, delta, &err));
    out.per_alpha_error.push_back(err);
  }
  out.A = out.per_alpha.back();
  if (alphas.size() >= 2) {
    out.cauchy_gap = (out.per_alpha.back() - out.per_alpha[out.per_alpha.size() - 2]).cwiseAbs().maxCoeff();
    out.converged = out.cauchy_gap < matrix_tol;
    if (!out.converged) out.diagnostic = "successive matrices differ by more than matrix_tol";
  } else {
    out.diagnostic = "a Cauchy check needs at least two alphas";
  }
  out.A_half_delta = second_moment(f, alphas.back(), x, 0.5 * delta);
  out.delta_gap = (out.A_half_delta - out.A).cwiseAbs().maxCoeff();
  out.delta_consistent = out.delta_gap < matrix_tol;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (out.A + out.A.transpose()));
  out.eigenvalues = eig.eigenvalues();
  return out;
}

EllipticityCheck check_ellipticity(const Eigen::MatrixXd& A, int dim, double lambda, double tol) {
  EllipticityCheck c;
  c.lower = 1.0 / (dim * lambda) - tol;
  c.upper = lambda / dim + tol;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (A + A.transpose()));
  c.eigenvalues = eig.eigenvalues();
  c.holds = c.eigenvalues.minCoeff() >= c.lower && c.eigenvalues.maxCoeff() <= c.upper;
  return c;
}

double eval_form_local(const Eigen::MatrixXd& A, const GridFunction& u, const GridFunction& v) {
  if (u.domain != v.domain) throw std::invalid_argument("grid functions live on different domains");
  if (u.basis != Basis::P1 || v.basis != Basis::P1) throw std::invalid_argument("the local form needs P1 functions");
  const int nc = u.domain->closure_node_count();
  const Eigen::MatrixXd K = local_stiffness(*u.domain, A);
  return symmetric_product(K, u.full_coeffs().head(nc), v.full_coeffs().head(nc));
}

namespace {

std::optional<double> evaluate_coeffs(const Domain& dom, Basis basis, bool omega_only, const Eigen::VectorXd& c,
                                      const Point& x) {
  const auto cell = dom.locate(x);
  if (!cell) return std::nullopt;
  const auto& cl = dom.cells()[*cell];
  if (omega_only && !cl.in_omega) return std::nullopt;
  if (basis == Basis::P0) return c(*cell);
  const Point xi = x - cl.corner;
  double value = 0.0;
  for (std::size_t l = 0; l < cl.nodes.size(); ++l) value += q1_shape(static_cast<int>(l), xi, dom.spacing()) * c(cl.nodes[l]);
  return value;
}

}  // namespace

GridFunction smooth_approximation(const GridFunction& u, double eps, const Point& direction, double tau) {
  const Domain& dom = *u.domain;
  const int d = dom.dim();
  if (direction.size() != d || !(direction.norm() > 0.0)) throw std::invalid_argument("direction must be a nonzero vector");
  // Axis-aligned boundaries have Lipschitz constant 0, so any tau > 1 is admissible.
  if (!(tau > 1.0)) throw std::domain_error("tau must exceed 1");
  if (!(eps > 0.0)) throw std::domain_error("eps must be positive");
  if ((tau + 1.0) * eps >= dom.coverage()) throw std::domain_error("shift exits the truncation ball");
  const Point dir = direction / direction.norm();

  std::vector<Point> z;
  std::vector<double> w;
  auto bump = [](double t) { return t < 1.0 ? std::exp(-1.0 / (1.0 - t * t)) : 0.0; };
  if (d == 1) {
    const auto& rule = gauss_legendre(24);
    for (Eigen::Index i = 0; i < rule.nodes.size(); ++i) {
      z.push_back(make_point(eps * rule.nodes(i)));
      w.push_back(rule.weights(i) * bump(std::abs(rule.nodes(i))));
    }
  } else {
    const auto& rule = gauss_legendre(12);
    const int na = 24;
    for (Eigen::Index i = 0; i < rule.nodes.size(); ++i) {
      const double t = 0.5 * (1.0 + rule.nodes(i));
      for (int k = 0; k < na; ++k) {
        const double th = 2.0 * std::numbers::pi * k / na;
        z.push_back(eps * t * make_point(std::cos(th), std::sin(th)));
        w.push_back(rule.weights(i) * t * bump(t));
      }
    }
  }
  double total = 0.0;
  for (double x : w) total += x;
  for (double& x : w) x /= total;

  const Eigen::VectorXd c = u.full_coeffs();
  const bool omega_only = u.space == SpaceTag::HnuOmega;
  GridFunction v = u;
  if (v.space == SpaceTag::VnuZeroComplement) v.space = SpaceTag::VnuFull;
  for (Eigen::Index i = 0; i < v.coeffs.size(); ++i) {
    const Point xi = u.basis == Basis::P1 ? dom.nodes()[i] : Point(dom.cells()[i].corner + 0.5 * dom.spacing());
    const Point p = xi + tau * eps * dir;
    double acc = 0.0;
    bool inside = true;
    for (std::size_t j = 0; j < z.size() && inside; ++j) {
      const auto val = evaluate_coeffs(dom, u.basis, omega_only, c, p - z[j]);
      if (!val) inside = false;
      else acc += w[j] * *val;
    }
    if (inside) v.coeffs(i) = acc;
  }
  return v;
}

}  // namespace mosco
