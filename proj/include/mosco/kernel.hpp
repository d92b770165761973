#pragma once

#include "mosco/mollifier.hpp"
#include "mosco/types.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace mosco {

class Domain;

// nu^alpha(h) = |h|^{-2} rho_{2-alpha}(h).
double eval_nu_alpha(const Mollifier& family, double alpha, const Point& h);
double nu_alpha_radial(const Mollifier& family, double alpha, double r);

// int (1 ^ |h|^2) nu^alpha(h) dh.
double levy_integral(const Mollifier& family, double alpha);

enum class KernelKind { J1, J2, J3, J4, Nu, Perturbed, Violator };
enum class TailShape { Exponential, Gaussian };

struct KernelParams {
  KernelKind kind = KernelKind::Nu;
  MollifierParams base;
  double beta = 1.0;                        // J2 tail exponent
  TailShape tail = TailShape::Exponential;  // J3 tail
  double lambda = 0.0;                      // 0 selects the kind's default
  double gamma = 0.5;                       // violator extra singularity
  double alpha0 = 1.0;                      // lower end of the alpha range used for Lambda
  std::uint64_t seed = 0;                   // perturbed modulation
  int modes = 6;                            // perturbed modulation
};

std::string to_string(KernelKind kind);
KernelKind kernel_kind_from_string(const std::string& id);

// J^alpha(x, y) = c(x, y) j^alpha(|x - y|), where the modulation c is identically
// one for every kind except `perturbed`. The base mollifier defines the
// reference nu^alpha used by condition (E).
class KernelFamily {
 public:
  explicit KernelFamily(const KernelParams& params);

  const KernelParams& params() const { return params_; }
  KernelKind kind() const { return params_.kind; }
  int dim() const { return base_.dim(); }
  const Mollifier& base() const { return base_; }
  double lambda() const { return lambda_; }
  bool translation_invariant() const { return params_.kind != KernelKind::Perturbed; }

  double radial(double alpha, double r) const;
  double modulation(const Point& x, const Point& y) const;
  double operator()(double alpha, const Point& x, const Point& y) const;
  // Reference kernel nu^alpha(h) of the base family.
  double reference(double alpha, double r) const { return nu_alpha_radial(base_, alpha, r); }

  // j^alpha(r) ~ r^s as r -> 0.
  double leading_exponent(double alpha) const;
  std::vector<double> breakpoints(double alpha) const;
  double support_radius(double alpha) const;

  // int_{|h| > delta} J^alpha(x, x + h) dh, maximized over x. Exact radial integral
  // for translation-invariant kinds; Lambda times the radial integral otherwise.
  double tail_integral(double alpha, double delta) const;

 private:
  void check_alpha(double alpha) const;

  KernelParams params_;
  Mollifier base_;
  double lambda_ = 1.0;
  std::vector<double> mode_freq_;
  std::vector<double> mode_phase_;
  std::vector<double> mode_amp_;
  std::vector<double> mode_dir_;
  double aniso_phase_ = 0.0;
};

double eval_kernel(const KernelFamily& f, double alpha, const Point& x, const Point& y);

struct SampleSpec {
  int x_per_axis = 5;       // x on a uniform grid of [-x_extent, x_extent]^d
  double x_extent = 1.0;
  int radii = 40;           // geometric radii in [r_min, 1)
  double r_min = 1e-4;
  int directions = 16;      // angles in [0, pi) (two directions in 1D)
};

struct ConditionEReport {
  bool holds = true;
  double worst_ratio = 1.0;  // max over samples of max(J/nu, nu/J); inf if one side vanishes alone
  double min_ratio = 1.0;
  double max_ratio = 1.0;
  Point witness_x;
  Point witness_h;
  int samples = 0;
};

ConditionEReport check_condition_E(const KernelFamily& f, double alpha, const SampleSpec& spec = {});

struct ConditionLReport {
  std::vector<double> alphas;
  std::vector<double> values;
  bool decreasing = true;  // values non-increasing along the sweep
  bool tends_to_zero = true;
  bool finite = true;
};

ConditionLReport check_condition_L(const KernelFamily& f, double delta, const std::vector<double>& alphas);

// sup over an alpha grid of (alpha0, 2) of sup_x int_{|h| > 1} J^alpha(x, x + h) dh.
double kappa0(const KernelFamily& f, double alpha0, int grid = 64);

struct TildeNu {
  std::function<double(const Point&)> density;
  double R = 1.0;
  double mass = 0.0;
  double levy_bound = 0.0;  // R^{-d} int (1 ^ |h|^2) nu
  bool bound_holds = false;
};

// h -> nu(R (1 + |h|)) with R >= 1 minimal such that Omega lies in B_R(0).
TildeNu tilde_nu(const std::function<double(double)>& nu_radial, int dim, double R);
TildeNu tilde_nu(const std::function<double(double)>& nu_radial, const Domain& omega);

}  // namespace mosco
