#pragma once

#include "mosco/domain.hpp"
#include "mosco/kernel.hpp"
#include "mosco/pair_integration.hpp"

#include <Eigen/Sparse>

#include <array>
#include <map>
#include <optional>
#include <vector>

namespace mosco {

struct QuadOptions {
  PairQuadrature pair;
  // A report whose error estimate exceeds quad_tol * max(1, |value|) raises NumericalError.
  double quad_tol = 1e-8;
  int jobs = 0;
};

struct FormReport {
  double value = 0.0;
  double error_estimate = 0.0;
  double tail_bound = 0.0;
  double singular_part = 0.0;  // contributions of touching cell pairs
  double regular_part = 0.0;
  double inner_part = 0.0;     // Omega x Omega
  double cross_part = 0.0;     // Omega x Omega^c, counted once; value = inner + 2 cross
};

// Galerkin matrices of a nonlocal form on a fixed domain and basis, so that
// E_Omega(u, v) = u^T inner v over the Omega-closure dofs and
// E(u, v) = u^T (inner + 2 cross) v over all dofs. Matrices are assembled
// lazily and kept; an instance is not meant to be shared across threads.
class NonlocalForm {
 public:
  NonlocalForm(const KernelFamily& kernel, double alpha, const Domain& domain, Basis basis = Basis::P1,
               const QuadOptions& options = {});

  const KernelFamily& kernel() const { return kernel_; }
  double alpha() const { return alpha_; }
  const Domain& domain() const { return domain_; }
  Basis basis() const { return basis_; }

  const Eigen::MatrixXd& inner_matrix();  // closure dofs
  const Eigen::MatrixXd& cross_matrix();  // all dofs
  Eigen::MatrixXd full_matrix();          // all dofs

  FormReport inner(const GridFunction& u, const GridFunction& v);
  FormReport full(const GridFunction& u, const GridFunction& v);

  // E restricted to pairs of the given Omega cells, for coefficient vectors over
  // all dofs. Uses the same cell-pair integrals as the assembled matrices.
  double energy_on_cells(const std::vector<int>& cells, const Eigen::VectorXd& u, const Eigen::VectorXd& v);

  // Discarded interaction beyond the collar per unit sup-norms.
  double truncation_tail();

 private:
  struct Assembled {
    Eigen::MatrixXd value;
    Eigen::MatrixXd error;
    Eigen::SparseMatrix<double> singular;
  };
  const PairMatrix& pair(int first, int second);
  Assembled assemble(Region region);
  void ensure_inner();
  void ensure_cross();

  const KernelFamily& kernel_;
  double alpha_;
  const Domain& domain_;
  Basis basis_;
  QuadOptions options_;
  std::map<std::array<int, 2>, PairMatrix> offset_cache_;
  std::map<std::pair<int, int>, PairMatrix> pair_cache_;
  std::optional<Assembled> inner_;
  std::optional<Assembled> cross_;
  std::optional<double> tail_;
};

FormReport eval_form_inner(const KernelFamily& f, double alpha, const GridFunction& u, const GridFunction& v,
                           const QuadOptions& options = {});
FormReport eval_form_full(const KernelFamily& f, double alpha, const GridFunction& u, const GridFunction& v,
                          const QuadOptions& options = {});

// L^2 Gram matrix over Omega cells (omega_only) or over all grid cells.
Eigen::MatrixXd mass_matrix(const Domain& domain, Basis basis, bool omega_only);
// int_Omega <A grad phi_i, grad phi_j> over the Omega-closure nodes (P1 only).
Eigen::MatrixXd local_stiffness(const Domain& domain, const Eigen::MatrixXd& A);

double l2_norm_omega(const GridFunction& u);
double l2_norm_all(const GridFunction& u);

double seminorm_H_nu(NonlocalForm& form, const GridFunction& u);
double norm_H_nu(NonlocalForm& form, const GridFunction& u);
double seminorm_V_nu(NonlocalForm& form, const GridFunction& u);
double norm_V_nu_full(NonlocalForm& form, const GridFunction& u);
double norm_V_nu_triple(NonlocalForm& form, const GridFunction& u);

struct DiffusionMatrix {
  Eigen::MatrixXd A;                    // last iterate
  double delta = 1.0;
  std::vector<double> alphas;
  std::vector<Eigen::MatrixXd> per_alpha;
  std::vector<double> per_alpha_error;
  double cauchy_gap = 0.0;              // max-norm difference of the last two iterates
  bool converged = false;               // cauchy_gap < matrix_tol
  double matrix_tol = 1e-3;
  Eigen::MatrixXd A_half_delta;         // final alpha recomputed at delta / 2
  double delta_gap = 0.0;
  bool delta_consistent = false;        // delta_gap < matrix_tol
  Eigen::VectorXd eigenvalues;
  std::string diagnostic;
};

// a_ij = int_{B_delta} h_i h_j J^alpha(x, x + h) dh along the sweep.
DiffusionMatrix diffusion_matrix(const KernelFamily& f, const Point& x, double delta,
                                 const std::vector<double>& alphas, double matrix_tol = 1e-3);
Eigen::MatrixXd second_moment(const KernelFamily& f, double alpha, const Point& x, double delta,
                              double* error = nullptr);

struct EllipticityCheck {
  bool holds = false;
  double lower = 0.0;
  double upper = 0.0;
  Eigen::VectorXd eigenvalues;
};
EllipticityCheck check_ellipticity(const Eigen::MatrixXd& A, int dim, double lambda, double tol);

double eval_form_local(const Eigen::MatrixXd& A, const GridFunction& u, const GridFunction& v);

// v = eta_eps * u(. + tau eps direction) with a C^infinity bump eta_eps on B_eps.
// Nodes whose stencil leaves the grid keep the value of u.
GridFunction smooth_approximation(const GridFunction& u, double eps, const Point& direction, double tau = 2.0);

}  // namespace mosco
