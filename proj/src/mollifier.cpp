#include "mosco/mollifier.hpp"

#include "mosco/constants.hpp"
#include "mosco/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mosco {

namespace {

const std::vector<std::pair<MollifierKind, std::string>>& kind_names() {
  static const std::vector<std::pair<MollifierKind, std::string>> names = {
      {MollifierKind::PowerLaw, "power_law"},
      {MollifierKind::BoundedPoly, "bounded_poly"},
      {MollifierKind::LogAnnulus, "log_annulus"},
      {MollifierKind::ShiftedPower, "shifted_power"},
      {MollifierKind::ShiftedCritical, "shifted_critical"},
      {MollifierKind::ShiftedRatio, "shifted_ratio"},
      {MollifierKind::Profile, "profile"},
  };
  return names;
}

// Each shape integrates to one over [0, inf).
double phi(ProfileShape shape, double t) {
  switch (shape) {
    case ProfileShape::Exponential:
      return std::exp(-t);
    case ProfileShape::Indicator:
      return t < 1.0 ? 1.0 : 0.0;
    case ProfileShape::HalfGaussian:
      return std::sqrt(2.0 / std::numbers::pi) * std::exp(-0.5 * t * t);
  }
  return 0.0;
}

}  // namespace

std::string to_string(MollifierKind kind) {
  for (const auto& [k, name] : kind_names())
    if (k == kind) return name;
  return "unknown";
}

MollifierKind mollifier_kind_from_string(const std::string& id) {
  for (const auto& [k, name] : kind_names())
    if (name == id) return k;
  throw std::invalid_argument("unknown mollifier family '" + id + "'");
}

std::string to_string(ProfileShape shape) {
  switch (shape) {
    case ProfileShape::Exponential:
      return "exp";
    case ProfileShape::Indicator:
      return "indicator";
    case ProfileShape::HalfGaussian:
      return "half_gaussian";
  }
  return "unknown";
}

ProfileShape profile_shape_from_string(const std::string& id) {
  if (id == "exp") return ProfileShape::Exponential;
  if (id == "indicator") return ProfileShape::Indicator;
  if (id == "half_gaussian") return ProfileShape::HalfGaussian;
  throw std::invalid_argument("unknown profile shape '" + id + "'");
}

Mollifier::Mollifier(const MollifierParams& params)
    : params_(params), omega_(sphere_area(params.dim)), cache_(std::make_shared<Cache>()) {
  const int d = params.dim;
  const double beta = params.beta;
  if (d < 1 || d > 2) throw std::domain_error("mollifier dimension must be 1 or 2");
  if (!(params.eps0 > 0.0)) throw std::domain_error("eps0 must be positive");
  switch (params.kind) {
    case MollifierKind::BoundedPoly:
      if (!(beta > -d && beta <= 2.0)) throw std::domain_error("bounded_poly needs -d < beta <= 2");
      break;
    case MollifierKind::ShiftedPower:
      // beta = -d is the shifted_critical family.
      if (!(beta <= 2.0) || beta == -d) throw std::domain_error("shifted_power needs beta <= 2, beta != -d");
      break;
    case MollifierKind::ShiftedRatio:
      if (!(beta > 0.0 && beta <= 2.0)) throw std::domain_error("shifted_ratio needs 0 < beta <= 2");
      break;
    default:
      break;
  }
}

void Mollifier::check_eps(double eps) const {
  if (!(eps > 0.0)) throw std::domain_error("eps must be positive");
  switch (params_.kind) {
    case MollifierKind::PowerLaw:
    case MollifierKind::Profile:
      if (!(eps < 2.0)) throw std::domain_error("eps must lie in (0, 2)");
      break;
    default:
      if (!(eps < params_.eps0)) throw std::domain_error("eps must lie in (0, eps0)");
  }
}

double Mollifier::shifted_b(double eps) const {
  {
    std::lock_guard lock(cache_->mutex);
    auto it = cache_->b.find(eps);
    if (it != cache_->b.end()) return it->second;
  }
  const int d = params_.dim;
  const double beta = params_.beta;
  const double lower = eps / (eps + params_.eps0);
  double b = 0.0;
  auto integrate = [&](const std::function<double(double)>& f) {
    const auto r = integrate_adaptive(f, lower, 1.0, 0.0, 1e-13, 20000);
    if (!r.converged) throw NumericalError("normalization integral did not converge");
    return r.value;
  };
  switch (params_.kind) {
    case MollifierKind::ShiftedPower:
      b = std::pow(eps, d + beta) *
          integrate([&](double t) { return std::pow(t, -d - beta - 1.0) * std::pow(1.0 - t, d - 1.0); });
      break;
    case MollifierKind::ShiftedCritical:
      b = integrate([&](double t) { return std::pow(1.0 - t, d - 1.0) / t; });
      break;
    case MollifierKind::ShiftedRatio:
      b = integrate([&](double t) { return std::pow(1.0 - t, d + beta - 1.0) / t; });
      break;
    default:
      b = 1.0;
  }
  std::lock_guard lock(cache_->mutex);
  cache_->b.emplace(eps, b);
  return b;
}

double Mollifier::normalization(double eps) const {
  check_eps(eps);
  return shifted_b(eps);
}

double Mollifier::profile(double eps, double r) const {
  check_eps(eps);
  if (r < 0.0) throw std::domain_error("radius must be nonnegative");
  const int d = params_.dim;
  const double beta = params_.beta;
  const double w = omega_;
  switch (params_.kind) {
    case MollifierKind::PowerLaw:
      if (r >= 1.0) return 0.0;
      return eps / w * std::pow(r, -d + eps);
    case MollifierKind::BoundedPoly:
      if (r >= eps) return 0.0;
      return (d + beta) / (w * std::pow(eps, d + beta)) * std::pow(r, beta);
    case MollifierKind::LogAnnulus:
      if (r <= eps || r >= params_.eps0) return 0.0;
      return std::pow(r, -d) / (w * std::log(params_.eps0 / eps));
    case MollifierKind::ShiftedPower:
      if (r >= params_.eps0) return 0.0;
      return std::pow(r + eps, beta) / (w * shifted_b(eps));
    case MollifierKind::ShiftedCritical:
      if (r >= params_.eps0) return 0.0;
      return std::pow(r + eps, -d) / (w * shifted_b(eps));
    case MollifierKind::ShiftedRatio:
      if (r >= params_.eps0) return 0.0;
      return std::pow(r, beta) / (w * shifted_b(eps) * std::pow(r + eps, d + beta));
    case MollifierKind::Profile:
      return std::pow(r, -d + 1.0) * phi(params_.profile, r / eps) / (w * eps);
  }
  return 0.0;
}

double Mollifier::operator()(double eps, const Point& h) const {
  if (h.size() != params_.dim) throw std::invalid_argument("point dimension does not match mollifier");
  const double r = h.norm();
  if (r == 0.0 && leading_exponent(eps) < 0.0) throw std::domain_error("mollifier is singular at the origin");
  return profile(eps, r);
}

double Mollifier::support_radius(double eps) const {
  switch (params_.kind) {
    case MollifierKind::PowerLaw:
      return 1.0;
    case MollifierKind::BoundedPoly:
      return eps;
    case MollifierKind::Profile:
      return params_.profile == ProfileShape::Indicator ? eps : kInf;
    default:
      return params_.eps0;
  }
}

double Mollifier::leading_exponent(double eps) const {
  const int d = params_.dim;
  switch (params_.kind) {
    case MollifierKind::PowerLaw:
      return -d + eps;
    case MollifierKind::BoundedPoly:
    case MollifierKind::ShiftedRatio:
      return params_.beta;
    case MollifierKind::Profile:
      return -d + 1.0;
    default:
      return 0.0;
  }
}

std::vector<double> Mollifier::breakpoints(double eps) const {
  std::vector<double> points;
  switch (params_.kind) {
    case MollifierKind::PowerLaw:
      points = {1.0};
      break;
    case MollifierKind::BoundedPoly:
      points = {eps};
      break;
    case MollifierKind::LogAnnulus:
      points = {eps, params_.eps0};
      break;
    case MollifierKind::ShiftedPower:
    case MollifierKind::ShiftedCritical:
    case MollifierKind::ShiftedRatio:
    case MollifierKind::Profile: {
      // The profile changes character at r ~ eps; grade geometrically around it.
      for (double f : {0.125, 0.5, 1.0, 2.0, 8.0}) points.push_back(f * eps);
      if (params_.kind == MollifierKind::Profile) {
        if (params_.profile != ProfileShape::Indicator) {
          for (double f : {16.0, 32.0, 64.0}) points.push_back(f * eps);
        }
      } else {
        points.push_back(params_.eps0);
      }
      break;
    }
  }
  std::sort(points.begin(), points.end());
  return points;
}

double Mollifier::almost_decreasing_constant() const {
  // log_annulus vanishes on B_eps and is positive just outside, so no finite
  // constant works; the checker reports this.
  return params_.kind == MollifierKind::LogAnnulus ? kInf : 1.0;
}

double eval_mollifier(const Mollifier& family, double eps, const Point& h) { return family(eps, h); }

namespace {

IntegrationResult radial_moment(const Mollifier& family, double eps, double lo, double hi,
                                double power) {
  const int d = family.dim();
  const double w = sphere_area(d);
  RadialHints hints;
  hints.leading_exponent = family.leading_exponent(eps) + power + d - 1.0;
  hints.breakpoints = family.breakpoints(eps);
  hi = std::min(hi, family.support_radius(eps));
  auto f = [&](double r) { return r == 0.0 ? 0.0 : w * std::pow(r, power + d - 1.0) * family.profile(eps, r); };
  if (lo > 0.0) hints.leading_exponent = 0.0;
  return integrate_radial_adaptive(f, lo, hi, hints, 1e-12);
}

}  // namespace

std::vector<double> concentration_integral(const Mollifier& family, double beta, double R,
                                           const std::vector<double>& eps_sweep) {
  if (beta < 0.0) throw std::domain_error("concentration exponent must be nonnegative");
  if (!(R > 0.0)) throw std::domain_error("concentration radius must be positive");
  std::vector<double> values;
  for (double eps : eps_sweep) {
    family.check_eps(eps);
    const auto r = radial_moment(family, eps, 0.0, R, beta);
    if (!r.converged) throw NumericalError("concentration integral did not converge");
    values.push_back(r.value);
  }
  return values;
}

double total_mass(const Mollifier& family, double eps) {
  family.check_eps(eps);
  const auto r = radial_moment(family, eps, 0.0, kInf, 0.0);
  if (!r.converged) throw NumericalError("mass integral did not converge");
  return r.value;
}

double tail_mass(const Mollifier& family, double eps, double delta) {
  family.check_eps(eps);
  const auto r = radial_moment(family, eps, delta, kInf, 0.0);
  if (!r.converged) throw NumericalError("tail integral did not converge");
  return r.value;
}

AlmostDecreasingReport check_almost_decreasing(const Mollifier& family, double eps, int samples) {
  family.check_eps(eps);
  const double c = family.almost_decreasing_constant();
  double r_max = std::min(family.support_radius(eps), 64.0 * eps + 1.0);
  const double r_min = 1e-4 * std::min(eps, 1.0);
  std::vector<double> radii(samples);
  std::vector<double> g(samples);
  for (int i = 0; i < samples; ++i) {
    radii[i] = r_min * std::pow(r_max / r_min, (i + 0.5) / samples);
    g[i] = family.profile(eps, radii[i]) / (radii[i] * radii[i]);
  }
  // For each outer radius compare against the smallest value of g seen so far.
  AlmostDecreasingReport report;
  std::size_t argmin = 0;
  for (int j = 0; j < samples; ++j) {
    if (g[j] < g[argmin]) argmin = j;
    if (g[j] == 0.0) continue;
    const double ratio = g[argmin] > 0.0 ? g[j] / g[argmin] : kInf;
    if (ratio > report.worst_ratio) {
      report.worst_ratio = ratio;
      report.witness_small = radii[argmin];
      report.witness_large = radii[j];
    }
  }
  report.holds = std::isfinite(c) && report.worst_ratio <= c * (1.0 + 1e-12);
  return report;
}

}  // namespace mosco
