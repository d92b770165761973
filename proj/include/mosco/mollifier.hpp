#pragma once

#include "mosco/types.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace mosco {

enum class MollifierKind {
  PowerLaw,         // eps/w |x|^{-d+eps} on B_1
  BoundedPoly,      // (d+beta)/(w eps^{d+beta}) |x|^beta on B_eps
  LogAnnulus,       // |x|^{-d} / (w log(eps0/eps)) on eps < |x| < eps0
  ShiftedPower,     // (|x|+eps)^beta / (w b_eps) on B_eps0
  ShiftedCritical,  // (|x|+eps)^{-d} / (w b_eps) on B_eps0
  ShiftedRatio,     // |x|^beta / (w b_eps (|x|+eps)^{d+beta}) on B_eps0
  Profile,          // |x|^{-d+1} phi(|x|/eps) / (w eps)
};

enum class ProfileShape { Exponential, Indicator, HalfGaussian };

struct MollifierParams {
  MollifierKind kind = MollifierKind::PowerLaw;
  int dim = 1;
  double beta = 2.0;
  double eps0 = 2.0;
  ProfileShape profile = ProfileShape::Exponential;
};

std::string to_string(MollifierKind kind);
MollifierKind mollifier_kind_from_string(const std::string& id);
std::string to_string(ProfileShape shape);
ProfileShape profile_shape_from_string(const std::string& id);

// A radial family rho_eps. Immutable after construction apart from the
// internally synchronized cache of normalization constants, so instances can be
// shared between threads.
class Mollifier {
 public:
  explicit Mollifier(const MollifierParams& params);

  const MollifierParams& params() const { return params_; }
  int dim() const { return params_.dim; }
  MollifierKind kind() const { return params_.kind; }

  // rho_eps as a function of r = |x|.
  double profile(double eps, double r) const;
  double operator()(double eps, const Point& h) const;

  // Radius outside of which rho_eps vanishes (kInf for full support).
  double support_radius(double eps) const;
  // rho_eps(r) ~ r^s as r -> 0 (s is reported even where rho vanishes near 0).
  double leading_exponent(double eps) const;
  // Radii where the profile is not smooth or changes scale.
  std::vector<double> breakpoints(double eps) const;
  // The constant c for which |y|^{-2} rho(y) <= c |x|^{-2} rho(x) when |y| >= |x|.
  double almost_decreasing_constant() const;
  // b_eps for the shifted families, 1 otherwise.
  double normalization(double eps) const;
  // Throws std::domain_error unless eps lies in the family's range.
  void check_eps(double eps) const;

 private:
  double shifted_b(double eps) const;

  MollifierParams params_;
  double omega_;
  struct Cache {
    std::mutex mutex;
    std::map<double, double> b;
  };
  std::shared_ptr<Cache> cache_;
};

double eval_mollifier(const Mollifier& family, double eps, const Point& h);

// int_{|x| <= R} |x|^beta rho_eps(x) dx for each eps.
std::vector<double> concentration_integral(const Mollifier& family, double beta, double R,
                                           const std::vector<double>& eps_sweep);

// int rho_eps, int_{|x| > delta} rho_eps by radial quadrature.
double total_mass(const Mollifier& family, double eps);
double tail_mass(const Mollifier& family, double eps, double delta);

struct AlmostDecreasingReport {
  bool holds = true;
  double worst_ratio = 0.0;  // max over samples of [|y|^-2 rho(y)] / [|x|^-2 rho(x)], |y| >= |x|
  double witness_small = 0.0;
  double witness_large = 0.0;
};

// Samples radii geometrically in (0, r_max] and checks the stored constant.
AlmostDecreasingReport check_almost_decreasing(const Mollifier& family, double eps,
                                               int samples = 400);

}  // namespace mosco
