#include "mosco/mosco_lab.hpp"

#include <Eigen/IterativeLinearSolvers>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mosco {

std::string to_string(ProblemSpace s) {
  switch (s) {
    case ProblemSpace::HnuOmega:
      return "H_nu_on_Omega";
    case ProblemSpace::VnuFull:
      return "V_nu_full";
    case ProblemSpace::VnuZeroComplement:
      return "V_nu_zero_complement";
    case ProblemSpace::H1:
      return "H1";
    case ProblemSpace::H1Zero:
      return "H1_zero";
  }
  return "?";
}

ProblemSpace problem_space_from_string(const std::string& id) {
  for (auto s : {ProblemSpace::HnuOmega, ProblemSpace::VnuFull, ProblemSpace::VnuZeroComplement, ProblemSpace::H1,
                 ProblemSpace::H1Zero})
    if (to_string(s) == id) return s;
  throw std::invalid_argument("unknown space '" + id + "'");
}

bool is_local(ProblemSpace s) { return s == ProblemSpace::H1 || s == ProblemSpace::H1Zero; }

std::string to_string(MoscoPair p) { return p == MoscoPair::Dirichlet ? "dirichlet" : "neumann"; }

MoscoPair mosco_pair_from_string(const std::string& id) {
  if (id == "dirichlet") return MoscoPair::Dirichlet;
  if (id == "neumann") return MoscoPair::Neumann;
  throw std::invalid_argument("unknown space pair '" + id + "'");
}

namespace {

std::vector<int> unknowns_for(const Domain& dom, ProblemSpace space, Basis basis) {
  std::vector<int> out;
  switch (space) {
    case ProblemSpace::HnuOmega:
    case ProblemSpace::H1:
      for (int i = 0; i < dom.closure_dof_count(basis); ++i) out.push_back(i);
      break;
    case ProblemSpace::VnuFull:
      for (int i = 0; i < dom.dof_count(basis); ++i) out.push_back(i);
      break;
    case ProblemSpace::VnuZeroComplement:
    case ProblemSpace::H1Zero:
      if (basis == Basis::P0) {
        for (int i = 0; i < dom.omega_cell_count(); ++i) out.push_back(i);
      } else {
        out = dom.interior_nodes();
      }
      break;
  }
  return out;
}

Eigen::MatrixXd restrict(const Eigen::MatrixXd& full, const std::vector<int>& idx) {
  const int n = static_cast<int>(idx.size());
  Eigen::MatrixXd out(n, n);
  for (int b = 0; b < n; ++b)
    for (int a = 0; a < n; ++a) out(a, b) = full(idx[a], idx[b]);
  return out;
}

SpaceTag tag_for(ProblemSpace space) {
  switch (space) {
    case ProblemSpace::HnuOmega:
    case ProblemSpace::H1:
      return SpaceTag::HnuOmega;
    case ProblemSpace::VnuFull:
      return SpaceTag::VnuFull;
    default:
      return SpaceTag::VnuZeroComplement;
  }
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (v[k] == 0.0 && v[k - 1] == 0.0) continue;
    if (!(v[k] < v[k - 1])) return false;
  }
  return true;
}

}  // namespace

AssembledSystem assemble(const VariationalProblem& p, NonlocalForm* form) {
  if (!p.domain) throw std::invalid_argument("problem without domain");
  const Domain& dom = *p.domain;
  if (p.source.domain != &dom) throw std::invalid_argument("source lives on a different domain");
  if (!(p.lambda > 0.0)) throw std::domain_error("lambda must be positive");
  const Basis basis = p.source.basis;
  if (is_local(p.space) && basis != Basis::P1) throw std::invalid_argument("local problems need P1 functions");

  Eigen::MatrixXd K;
  if (is_local(p.space)) {
    K = local_stiffness(dom, p.A);
  } else {
    if (!p.kernel) throw std::invalid_argument("nonlocal problem without kernel");
    std::optional<NonlocalForm> own;
    if (!form) {
      own.emplace(*p.kernel, p.alpha, dom, basis, p.quad);
      form = &*own;
    }
    if (&form->domain() != &dom || form->basis() != basis || form->alpha() != p.alpha)
      throw std::invalid_argument("form does not match the problem");
    K = p.space == ProblemSpace::HnuOmega ? form->inner_matrix() : form->full_matrix();
  }

  AssembledSystem sys;
  sys.lambda = p.lambda;
  sys.unknowns = unknowns_for(dom, p.space, basis);
  const Eigen::MatrixXd M = mass_matrix(dom, basis, p.space != ProblemSpace::VnuFull);
  sys.K = restrict(K, sys.unknowns);
  sys.M = restrict(M, sys.unknowns);
  const Eigen::VectorXd Mf = M * p.source.full_coeffs();
  sys.load.resize(static_cast<Eigen::Index>(sys.unknowns.size()));
  for (std::size_t a = 0; a < sys.unknowns.size(); ++a) sys.load(a) = Mf(sys.unknowns[a]);
  return sys;
}

GridFunction solve_system(const VariationalProblem& p, const AssembledSystem& sys, SolveInfo* info) {
  const Eigen::MatrixXd S = sys.system();
  const double scale = S.cwiseAbs().maxCoeff();
  if ((S - S.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) throw NumericalError("system matrix is not symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(S);
  if (llt.info() != Eigen::Success) throw NumericalError("system matrix is not positive definite");

  Eigen::VectorXd x = Eigen::VectorXd::Zero(S.rows());
  SolveInfo local;
  if (sys.load.norm() > 0.0) {
    Eigen::ConjugateGradient<Eigen::MatrixXd, Eigen::Lower | Eigen::Upper> cg;
    cg.setTolerance(p.solver_tol);
    cg.setMaxIterations(std::max<Eigen::Index>(1000, 20 * S.rows()));
    cg.compute(S);
    x = cg.solve(sys.load);
    if (cg.info() != Eigen::Success) throw NumericalError("conjugate gradients did not converge");
    local.iterations = static_cast<int>(cg.iterations());
    local.residual = (S * x - sys.load).norm() / sys.load.norm();
  }
  if (info) *info = local;

  GridFunction u;
  u.domain = p.domain;
  u.basis = p.source.basis;
  u.space = tag_for(p.space);
  const int n = u.space == SpaceTag::HnuOmega ? p.domain->closure_dof_count(u.basis) : p.domain->dof_count(u.basis);
  u.coeffs = Eigen::VectorXd::Zero(n);
  for (std::size_t a = 0; a < sys.unknowns.size(); ++a) u.coeffs(sys.unknowns[a]) = x(a);
  return u;
}

GridFunction solve_resolvent(const VariationalProblem& p, NonlocalForm* form, SolveInfo* info) {
  return solve_system(p, assemble(p, form), info);
}

GridFunction difference(const GridFunction& u, const GridFunction& v) {
  if (u.domain != v.domain || u.basis != v.basis) throw std::invalid_argument("grid functions are not comparable");
  GridFunction d;
  d.domain = u.domain;
  d.basis = u.basis;
  d.space = SpaceTag::VnuFull;
  d.coeffs = u.full_coeffs() - v.full_coeffs();
  return d;
}

MoscoReport mosco_sweep(const GridFunction& f, const KernelFamily& kernel, const std::vector<double>& alphas,
                        MoscoPair pair, const MoscoOptions& options) {
  if (!f.domain) throw std::invalid_argument("source without domain");
  if (alphas.empty()) throw std::invalid_argument("alpha sweep is empty");
  if (!kernel.translation_invariant())
    throw std::invalid_argument("the sweep compares against a constant diffusion matrix; use a translation-invariant kernel");
  const Domain& dom = *f.domain;
  const auto cond = check_condition_E(kernel, alphas.back());
  if (!cond.holds) throw std::domain_error("kernel violates condition (E)");

  MoscoReport rep;
  rep.pair = pair;
  rep.cells_per_axis = dom.spec().n;
  rep.alphas = alphas;
  const Point x0 = dom.cells().front().corner + 0.5 * dom.spacing();
  const auto dm = diffusion_matrix(kernel, x0, options.delta, alphas, options.matrix_tol);
  if (!dm.converged) throw std::domain_error("diffusion matrix did not converge: " + dm.diagnostic);
  rep.A = dm.A;

  VariationalProblem local;
  local.domain = &dom;
  local.space = pair == MoscoPair::Dirichlet ? ProblemSpace::H1Zero : ProblemSpace::H1;
  local.A = rep.A;
  local.source = f;
  local.lambda = options.lambda;
  local.solver_tol = options.solver_tol;
  try {
    rep.local_solution = solve_resolvent(local);
    rep.local_energy = eval_form_local(rep.A, *rep.local_solution, *rep.local_solution);
    for (double a : alphas) {
      NonlocalForm form(kernel, a, dom, f.basis, options.quad);
      VariationalProblem p = local;
      p.space = pair == MoscoPair::Dirichlet ? ProblemSpace::VnuZeroComplement : ProblemSpace::HnuOmega;
      p.kernel = &kernel;
      p.alpha = a;
      p.quad = options.quad;
      GridFunction u = solve_resolvent(p, &form);
      const FormReport e = pair == MoscoPair::Dirichlet ? form.full(u, u) : form.inner(u, u);
      rep.l2_distance.push_back(l2_norm_omega(difference(u, *rep.local_solution)));
      rep.nonlocal_energy.push_back(e.value);
      rep.cross_term.push_back(e.cross_part);
      rep.solutions.push_back(std::move(u));
    }
    rep.complete = true;
  } catch (const std::exception& e) {
    rep.diagnostic = e.what();
  }
  rep.decreasing = rep.complete && strictly_decreasing(rep.l2_distance);
  rep.final_below_tol = rep.complete && rep.l2_distance.back() < options.mosco_tol;
  return rep;
}

LimsupReport limsup_diagnostic(const GridFunction& u, const KernelFamily& kernel, const std::vector<double>& alphas,
                               const Eigen::MatrixXd& A, const QuadOptions& quad) {
  LimsupReport rep;
  rep.alphas = alphas;
  rep.local_value = eval_form_local(A, u, u);
  for (double a : alphas) {
    NonlocalForm form(kernel, a, *u.domain, u.basis, quad);
    const FormReport r = u.space == SpaceTag::HnuOmega ? form.inner(u, u) : form.full(u, u);
    rep.values.push_back(r.value);
    rep.cross_terms.push_back(r.cross_part);
    rep.gaps.push_back(std::abs(r.value - rep.local_value));
  }
  rep.gaps_decreasing = strictly_decreasing(rep.gaps);
  rep.cross_decreasing = strictly_decreasing(rep.cross_terms);
  return rep;
}

namespace {

struct ShiftStencil {
  std::vector<std::array<int, 2>> offsets;
  std::vector<double> weights;
};

ShiftStencil lattice_mollifier(const Domain& dom, int radius_cells) {
  if (radius_cells < 1) throw std::invalid_argument("shift radius must be at least one cell");
  const double delta = radius_cells * dom.spacing().minCoeff();
  ShiftStencil s;
  const int d = dom.dim();
  const int kmax = static_cast<int>(std::ceil(delta / dom.spacing().minCoeff()));
  double total = 0.0;
  for (int i = -kmax; i <= kmax; ++i) {
    for (int j = (d == 2 ? -kmax : 0); j <= (d == 2 ? kmax : 0); ++j) {
      double r2 = std::pow(i * dom.spacing()(0), 2);
      if (d == 2) r2 += std::pow(j * dom.spacing()(1), 2);
      const double t = std::sqrt(r2) / delta;
      if (t >= 1.0) continue;
      const double w = std::exp(-1.0 / (1.0 - t * t));
      s.offsets.push_back({i, j});
      s.weights.push_back(w);
      total += w;
    }
  }
  for (double& w : s.weights) w /= total;
  return s;
}

}  // namespace

LiminfReport liminf_diagnostic(const std::vector<GridFunction>& seq, const GridFunction& u_limit,
                               const KernelFamily& kernel, const std::vector<double>& alphas,
                               const Eigen::MatrixXd& A, const LiminfOptions& options) {
  if (seq.size() != alphas.size()) throw std::invalid_argument("sequence and sweep lengths differ");
  if (alphas.empty()) throw std::invalid_argument("alpha sweep is empty");
  if (!kernel.translation_invariant()) throw std::invalid_argument("the shift check needs a translation-invariant kernel");
  const Domain& dom = *u_limit.domain;
  for (const auto& u : seq)
    if (u.domain != &dom || u.basis != u_limit.basis) throw std::invalid_argument("sequence lives on a different space");

  LiminfReport rep;
  rep.alphas = alphas;
  rep.local_value = eval_form_local(A, u_limit, u_limit);

  const auto stencil = lattice_mollifier(dom, options.shift_cells);
  const auto& cells = dom.cells();
  std::vector<int> omega_delta;
  std::vector<std::vector<int>> sources;  // per Omega_delta cell, the shifted source cells
  for (int c = 0; c < dom.omega_cell_count(); ++c) {
    std::vector<int> src;
    bool ok = true;
    for (const auto& k : stencil.offsets) {
      const auto s = dom.cell_at(cells[c].index[0] - k[0], cells[c].index[1] - k[1]);
      if (!s || !cells[*s].in_omega) {
        ok = false;
        break;
      }
      src.push_back(*s);
    }
    if (ok) {
      omega_delta.push_back(c);
      sources.push_back(std::move(src));
    }
  }
  rep.omega_delta_cells = static_cast<int>(omega_delta.size());

  rep.jensen_holds = true;
  for (std::size_t n = 0; n < seq.size(); ++n) {
    NonlocalForm form(kernel, alphas[n], dom, u_limit.basis, options.quad);
    const Eigen::VectorXd u = seq[n].full_coeffs();
    rep.energies.push_back(form.inner(seq[n], seq[n]).value);
    rep.l2_to_limit.push_back(l2_norm_omega(difference(seq[n], u_limit)));

    Eigen::VectorXd w = Eigen::VectorXd::Zero(u.size());
    for (std::size_t m = 0; m < omega_delta.size(); ++m) {
      const auto& target = dom.cell_dofs(u_limit.basis, omega_delta[m]);
      for (std::size_t l = 0; l < target.size(); ++l) {
        double v = 0.0;
        for (std::size_t k = 0; k < stencil.weights.size(); ++k)
          v += stencil.weights[k] * u(dom.cell_dofs(u_limit.basis, sources[m][k])[l]);
        w(target[l]) = v;
      }
    }
    const double moll = form.energy_on_cells(omega_delta, w, w);
    rep.mollified.push_back(moll);
    if (moll > rep.energies.back() * (1.0 + 1e-10) + 1e-14) rep.jensen_holds = false;
  }
  const std::size_t start = seq.size() / 2;
  rep.tail_min = *std::min_element(rep.energies.begin() + start, rep.energies.end());
  rep.liminf_holds = rep.local_value <= rep.tail_min + options.liminf_tol;
  return rep;
}

}  // namespace mosco
