#pragma once

#include "mosco/forms.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mosco {

enum class ProblemSpace { HnuOmega, VnuFull, VnuZeroComplement, H1, H1Zero };
std::string to_string(ProblemSpace s);
ProblemSpace problem_space_from_string(const std::string& id);
bool is_local(ProblemSpace s);

// E(u, v) + lambda <u, v> = <f, v> for all v in the discrete space. Nonlocal
// spaces need `kernel` and `alpha`, local ones need `A`.
struct VariationalProblem {
  const Domain* domain = nullptr;
  ProblemSpace space = ProblemSpace::H1Zero;
  const KernelFamily* kernel = nullptr;
  double alpha = 1.5;
  Eigen::MatrixXd A;
  GridFunction source;
  double lambda = 1.0;
  double solver_tol = 1e-10;
  QuadOptions quad;
};

struct AssembledSystem {
  Eigen::MatrixXd K;        // form restricted to the unknowns
  Eigen::MatrixXd M;        // mass restricted to the unknowns
  Eigen::VectorXd load;     // M f
  std::vector<int> unknowns;  // global dof of each unknown
  Eigen::MatrixXd system() const { return K + lambda * M; }
  double lambda = 1.0;
};

// Pass `form` to reuse matrices already assembled for the same kernel and alpha.
AssembledSystem assemble(const VariationalProblem& problem, NonlocalForm* form = nullptr);

struct SolveInfo {
  int iterations = 0;
  double residual = 0.0;
};

GridFunction solve_resolvent(const VariationalProblem& problem, NonlocalForm* form = nullptr,
                             SolveInfo* info = nullptr);

// Solution of the system given the assembled matrices.
GridFunction solve_system(const VariationalProblem& problem, const AssembledSystem& sys, SolveInfo* info = nullptr);

// Coefficient-wise u - v over all dofs.
GridFunction difference(const GridFunction& u, const GridFunction& v);

enum class MoscoPair { Dirichlet, Neumann };
std::string to_string(MoscoPair p);
MoscoPair mosco_pair_from_string(const std::string& id);

struct MoscoOptions {
  double lambda = 1.0;
  double mosco_tol = 5e-3;
  double solver_tol = 1e-10;
  double matrix_tol = 1e-3;
  double delta = 1.0;  // radius used for the diffusion matrix
  QuadOptions quad;
};

struct MoscoReport {
  MoscoPair pair = MoscoPair::Dirichlet;
  int cells_per_axis = 0;
  std::vector<double> alphas;
  Eigen::MatrixXd A;
  std::vector<GridFunction> solutions;
  std::optional<GridFunction> local_solution;
  std::vector<double> l2_distance;
  std::vector<double> nonlocal_energy;
  std::vector<double> cross_term;
  double local_energy = 0.0;
  bool decreasing = false;
  bool final_below_tol = false;
  bool complete = false;
  std::string diagnostic;
  bool passed() const { return complete && decreasing && final_below_tol; }
};

// Resolvent comparison between the nonlocal problems along the sweep and the
// local problem with the matched constant A. Dirichlet compares the
// zero-complement space with H1_0, Neumann compares H_nu(Omega) with H1.
MoscoReport mosco_sweep(const GridFunction& f, const KernelFamily& kernel, const std::vector<double>& alphas,
                        MoscoPair pair, const MoscoOptions& options = {});

struct LimsupReport {
  std::vector<double> alphas;
  std::vector<double> values;       // E^alpha(u, u), full form when u has collar values
  std::vector<double> cross_terms;  // Omega x Omega^c part, counted once
  std::vector<double> gaps;         // |values - local_value|
  double local_value = 0.0;
  bool gaps_decreasing = false;
  bool cross_decreasing = false;
};

LimsupReport limsup_diagnostic(const GridFunction& u, const KernelFamily& kernel, const std::vector<double>& alphas,
                               const Eigen::MatrixXd& A, const QuadOptions& quad = {});

struct LiminfOptions {
  double liminf_tol = 5e-3;
  int shift_cells = 4;  // radius of the discrete mollifier in cells
  QuadOptions quad;
};

struct LiminfReport {
  std::vector<double> alphas;
  std::vector<double> energies;    // E^alpha_Omega(u_n, u_n)
  std::vector<double> mollified;   // E^alpha_{Omega_delta}(u_n * phi_delta)
  std::vector<double> l2_to_limit;
  double local_value = 0.0;
  double tail_min = 0.0;           // min of energies over the second half of the sweep
  bool liminf_holds = false;
  bool jensen_holds = false;
  int omega_delta_cells = 0;
};

LiminfReport liminf_diagnostic(const std::vector<GridFunction>& u_sequence, const GridFunction& u_limit,
                               const KernelFamily& kernel, const std::vector<double>& alphas,
                               const Eigen::MatrixXd& A, const LiminfOptions& options = {});

}  // namespace mosco
