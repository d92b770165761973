#include "mosco/kernel.hpp"

#include "mosco/constants.hpp"
#include "mosco/domain.hpp"
#include "mosco/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace mosco {

double nu_alpha_radial(const Mollifier& family, double alpha, double r) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw std::domain_error("alpha must lie in (0, 2)");
  if (!(r > 0.0)) throw std::domain_error("nu^alpha is undefined at h = 0");
  return family.profile(2.0 - alpha, r) / (r * r);
}

double eval_nu_alpha(const Mollifier& family, double alpha, const Point& h) {
  if (h.size() != family.dim()) throw std::invalid_argument("point dimension does not match kernel");
  return nu_alpha_radial(family, alpha, h.norm());
}

double levy_integral(const Mollifier& family, double alpha) {
  const double eps = 2.0 - alpha;
  const int d = family.dim();
  const double w = sphere_area(d);
  RadialHints hints;
  hints.leading_exponent = family.leading_exponent(eps) + d - 1.0;
  hints.breakpoints = family.breakpoints(eps);
  hints.breakpoints.push_back(1.0);
  auto f = [&](double r) {
    if (r == 0.0) return 0.0;
    return w * std::min(1.0, r * r) * std::pow(r, d - 1.0) * nu_alpha_radial(family, alpha, r);
  };
  const auto res = integrate_radial_adaptive(f, 0.0, std::min(kInf, family.support_radius(eps)), hints);
  if (!res.converged) throw NumericalError("Levy integral did not converge");
  return res.value;
}

namespace {

const std::vector<std::pair<KernelKind, std::string>>& kernel_names() {
  static const std::vector<std::pair<KernelKind, std::string>> names = {
      {KernelKind::J1, "j1"}, {KernelKind::J2, "j2"}, {KernelKind::J3, "j3"},
      {KernelKind::J4, "j4"}, {KernelKind::Nu, "nu"}, {KernelKind::Perturbed, "perturbed"},
      {KernelKind::Violator, "violator"},
  };
  return names;
}

// Smallest Lambda with Lambda^-1 <= C_{d,a} w / (2 - a) <= Lambda on a grid of
// [alpha0, 2), including the limit 2d.
double fractional_lambda(int d, double alpha0) {
  const double w = sphere_area(d);
  double lam = std::max(2.0 * d, 1.0 / (2.0 * d));
  const int grid = 200;
  for (int k = 0; k < grid; ++k) {
    const double a = alpha0 + (2.0 - alpha0) * k / grid;
    if (a <= 0.0) continue;
    const double ratio = fractional_constant(d, a) * w / (2.0 - a);
    lam = std::max({lam, ratio, 1.0 / ratio});
  }
  return lam;
}

}  // namespace

std::string to_string(KernelKind kind) {
  for (const auto& [k, name] : kernel_names())
    if (k == kind) return name;
  return "unknown";
}

KernelKind kernel_kind_from_string(const std::string& id) {
  for (const auto& [k, name] : kernel_names())
    if (name == id) return k;
  throw std::invalid_argument("unknown kernel kind '" + id + "'");
}

KernelFamily::KernelFamily(const KernelParams& params) : params_(params), base_(params.base) {
  const int d = dim();
  const double w = sphere_area(d);
  switch (params.kind) {
    case KernelKind::J1:
    case KernelKind::J2:
    case KernelKind::J3:
      if (params.base.kind != MollifierKind::PowerLaw)
        throw std::invalid_argument("j1, j2 and j3 are compared against the power_law base");
      if (params.kind == KernelKind::J2 && !(params.beta > 0.0))
        throw std::domain_error("j2 tail exponent must be positive");
      if (!(params.alpha0 > 0.0 && params.alpha0 < 2.0)) throw std::domain_error("alpha0 must lie in (0, 2)");
      lambda_ = fractional_lambda(d, params.alpha0);
      break;
    case KernelKind::J4:
      if (params.base.kind != MollifierKind::BoundedPoly || params.base.beta != 2.0)
        throw std::invalid_argument("j4 is compared against the bounded_poly base with beta = 2");
      lambda_ = std::max(w / (d + 2.0), (d + 2.0) / w);
      break;
    case KernelKind::Nu:
      lambda_ = 1.0;
      break;
    case KernelKind::Perturbed: {
      lambda_ = params.lambda > 0.0 ? params.lambda : 2.0;
      if (lambda_ < 1.0) throw std::domain_error("Lambda must be at least 1");
      std::mt19937_64 rng(params.seed);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      const int modes = std::max(1, params.modes);
      for (int k = 0; k < modes; ++k) {
        mode_freq_.push_back(1.0 + 4.0 * unit(rng));
        mode_phase_.push_back(2.0 * std::numbers::pi * unit(rng));
        mode_amp_.push_back(0.2 + unit(rng));
        mode_dir_.push_back(2.0 * std::numbers::pi * unit(rng));
      }
      aniso_phase_ = 2.0 * std::numbers::pi * unit(rng);
      break;
    }
    case KernelKind::Violator:
      if (!(params.gamma > 0.0)) throw std::domain_error("violator exponent must be positive");
      lambda_ = params.lambda > 0.0 ? params.lambda : 2.0;
      break;
  }
  if (params.lambda > 0.0 && params.kind != KernelKind::Perturbed && params.kind != KernelKind::Violator)
    lambda_ = params.lambda;
}

void KernelFamily::check_alpha(double alpha) const {
  if (!(alpha > 0.0 && alpha < 2.0)) throw std::domain_error("alpha must lie in (0, 2)");
}

double KernelFamily::radial(double alpha, double r) const {
  check_alpha(alpha);
  if (!(r > 0.0)) throw std::domain_error("kernel is undefined on the diagonal");
  const int d = dim();
  switch (params_.kind) {
    case KernelKind::J1:
      return fractional_constant(d, alpha) * std::pow(r, -d - alpha);
    case KernelKind::J2:
      if (r < 1.0) return fractional_constant(d, alpha) * std::pow(r, -d - alpha);
      return (2.0 - alpha) * std::pow(r, -d - params_.beta);
    case KernelKind::J3:
      if (r < 1.0) return fractional_constant(d, alpha) * std::pow(r, -d - alpha);
      return (2.0 - alpha) * (params_.tail == TailShape::Exponential ? std::exp(-r) : std::exp(-r * r));
    case KernelKind::J4: {
      const double eps = 2.0 - alpha;
      return r < eps ? std::pow(eps, -d - 2.0) : 0.0;
    }
    case KernelKind::Nu:
    case KernelKind::Perturbed:
      return nu_alpha_radial(base_, alpha, r);
    case KernelKind::Violator:
      return nu_alpha_radial(base_, alpha, r) * std::pow(r, -params_.gamma);
  }
  return 0.0;
}

double KernelFamily::modulation(const Point& x, const Point& y) const {
  if (params_.kind != KernelKind::Perturbed) return 1.0;
  const Point mid = 0.5 * (x + y);
  const Point h = y - x;
  double g = 0.0;
  double norm = 0.0;
  for (std::size_t k = 0; k < mode_freq_.size(); ++k) {
    double phase = mid(0) * std::cos(mode_dir_[k]);
    if (mid.size() > 1) phase += mid(1) * std::sin(mode_dir_[k]);
    g += mode_amp_[k] * std::cos(mode_freq_[k] * phase + mode_phase_[k]);
    norm += mode_amp_[k];
  }
  g /= norm;
  // cos(2 theta) is even under h -> -h, which keeps c symmetric.
  const double theta = h.size() > 1 ? std::atan2(h(1), h(0)) : (h(0) >= 0.0 ? 0.0 : std::numbers::pi);
  const double s = 0.6 * g + 0.4 * std::cos(2.0 * theta + aniso_phase_);
  return std::pow(lambda_, s);
}

double KernelFamily::operator()(double alpha, const Point& x, const Point& y) const {
  if (x.size() != dim() || y.size() != dim()) throw std::invalid_argument("point dimension does not match kernel");
  const Point h = y - x;
  const double r = h.norm();
  if (r == 0.0) throw std::domain_error("kernel is undefined on the diagonal");
  return modulation(x, y) * radial(alpha, r);
}

double KernelFamily::leading_exponent(double alpha) const {
  check_alpha(alpha);
  const int d = dim();
  switch (params_.kind) {
    case KernelKind::J1:
    case KernelKind::J2:
    case KernelKind::J3:
      return -d - alpha;
    case KernelKind::J4:
      return 0.0;
    case KernelKind::Nu:
    case KernelKind::Perturbed:
      return base_.leading_exponent(2.0 - alpha) - 2.0;
    case KernelKind::Violator:
      return base_.leading_exponent(2.0 - alpha) - 2.0 - params_.gamma;
  }
  return 0.0;
}

std::vector<double> KernelFamily::breakpoints(double alpha) const {
  check_alpha(alpha);
  switch (params_.kind) {
    case KernelKind::J1:
      return {};
    case KernelKind::J2:
    case KernelKind::J3:
      return {1.0};
    case KernelKind::J4:
      return {2.0 - alpha};
    default:
      return base_.breakpoints(2.0 - alpha);
  }
}

double KernelFamily::support_radius(double alpha) const {
  check_alpha(alpha);
  switch (params_.kind) {
    case KernelKind::J1:
    case KernelKind::J2:
    case KernelKind::J3:
      return kInf;
    case KernelKind::J4:
      return 2.0 - alpha;
    default:
      return base_.support_radius(2.0 - alpha);
  }
}

double KernelFamily::tail_integral(double alpha, double delta) const {
  check_alpha(alpha);
  if (!(delta > 0.0)) throw std::domain_error("delta must be positive");
  const int d = dim();
  const double w = sphere_area(d);
  const double support = support_radius(alpha);
  if (delta >= support) return 0.0;
  RadialHints hints;
  hints.breakpoints = breakpoints(alpha);
  auto f = [&](double r) { return w * std::pow(r, d - 1.0) * radial(alpha, r); };
  const auto res = integrate_radial_adaptive(f, delta, support, hints, 1e-12);
  if (!res.converged || !std::isfinite(res.value)) throw NumericalError("tail integral diverges or failed to converge");
  const double scale = params_.kind == KernelKind::Perturbed ? lambda_ : 1.0;
  return scale * res.value;
}

double eval_kernel(const KernelFamily& f, double alpha, const Point& x, const Point& y) {
  return f(alpha, x, y);
}

ConditionEReport check_condition_E(const KernelFamily& f, double alpha, const SampleSpec& spec) {
  const int d = f.dim();
  const double lam = f.lambda();
  ConditionEReport report;
  report.witness_x = Point::Zero(d);
  report.witness_h = Point::Zero(d);
  report.min_ratio = kInf;
  report.max_ratio = 0.0;
  report.worst_ratio = 1.0;
  const int nx = std::max(1, spec.x_per_axis);
  auto coord = [&](int i) { return nx == 1 ? 0.0 : -spec.x_extent + 2.0 * spec.x_extent * i / (nx - 1); };
  const int ndir = d == 1 ? 2 : std::max(1, spec.directions);
  const int ny = d == 1 ? 1 : nx;
  for (int ix = 0; ix < nx; ++ix) {
    for (int iy = 0; iy < ny; ++iy) {
      Point x = d == 1 ? make_point(coord(ix)) : make_point(coord(ix), coord(iy));
      for (int k = 0; k < spec.radii; ++k) {
        // Radii stay below 1: nu^alpha lives on the open unit ball, so |h| = 1 is a null set.
        const double r = spec.r_min * std::pow(1.0 / spec.r_min, double(k) / spec.radii);
        for (int m = 0; m < ndir; ++m) {
          Point h(d);
          if (d == 1) {
            h(0) = m == 0 ? r : -r;
          } else {
            const double theta = std::numbers::pi * m / ndir;
            h << r * std::cos(theta), r * std::sin(theta);
          }
          const double j = f(alpha, x, x + h);
          const double nu = f.reference(alpha, ((x + h) - x).norm());
          ++report.samples;
          if (j == 0.0 && nu == 0.0) continue;
          const double ratio = nu > 0.0 ? j / nu : kInf;
          report.min_ratio = std::min(report.min_ratio, ratio);
          report.max_ratio = std::max(report.max_ratio, ratio);
          const double badness = ratio > 0.0 ? std::max(ratio, 1.0 / ratio) : kInf;
          if (badness > report.worst_ratio) {
            report.worst_ratio = badness;
            report.witness_x = x;
            report.witness_h = h;
          }
        }
      }
    }
  }
  if (report.max_ratio == 0.0 && report.min_ratio == kInf) report.min_ratio = report.max_ratio = 1.0;
  report.holds = report.worst_ratio <= lam * (1.0 + 1e-9);  // |h| is recomputed from x and x + h
  return report;
}

ConditionLReport check_condition_L(const KernelFamily& f, double delta, const std::vector<double>& alphas) {
  ConditionLReport report;
  report.alphas = alphas;
  for (double a : alphas) {
    double v = kInf;
    try {
      v = f.tail_integral(a, delta);
    } catch (const NumericalError&) {
      report.finite = false;
    }
    report.values.push_back(v);
  }
  for (std::size_t k = 1; k < report.values.size(); ++k) {
    if (report.values[k] > report.values[k - 1] * (1.0 + 1e-12) + 1e-300) report.decreasing = false;
  }
  // "Tends to zero" as far as a finite sweep can tell: the last value is a small
  // fraction of the first, or everything vanishes.
  if (!report.values.empty()) {
    const double first = report.values.front();
    const double last = report.values.back();
    report.tends_to_zero = report.finite && (last == 0.0 || last <= 0.1 * first);
  }
  return report;
}

double kappa0(const KernelFamily& f, double alpha0, int grid) {
  if (!(alpha0 > 0.0 && alpha0 < 2.0)) throw std::domain_error("alpha0 must lie in (0, 2)");
  double sup = 0.0;
  for (int k = 1; k < grid; ++k) {
    const double a = alpha0 + (2.0 - alpha0) * k / grid;
    sup = std::max(sup, f.tail_integral(a, 1.0));
  }
  return sup;
}

TildeNu tilde_nu(const std::function<double(double)>& nu_radial, int dim, double R) {
  if (!(R >= 1.0)) throw std::domain_error("R must be at least 1");
  // Full support is checked on a coarse geometric grid of radii.
  for (double r = 1e-3; r < 1e6; r *= 4.0) {
    if (!(nu_radial(r) > 0.0)) throw std::domain_error("tilde_nu requires nu with full support");
  }
  const double w = sphere_area(dim);
  TildeNu out;
  out.R = R;
  out.density = [nu_radial, R](const Point& h) { return nu_radial(R * (1.0 + h.norm())); };
  auto mass_integrand = [&](double r) { return w * std::pow(r, dim - 1.0) * nu_radial(R * (1.0 + r)); };
  const auto mass = integrate_radial_adaptive(mass_integrand, 0.0, kInf, RadialHints{}, 1e-11);
  if (!mass.converged) throw NumericalError("tilde_nu mass did not converge");
  out.mass = mass.value;
  auto levy = [&](double r) { return w * std::pow(r, dim - 1.0) * std::min(1.0, r * r) * nu_radial(r); };
  RadialHints hints;
  hints.breakpoints = {1.0};
  // Near zero the integrand behaves like r^{d+1} nu(r); Gauss-Kronrod copes with
  // the integrable power there.
  const auto lv0 = integrate_adaptive(levy, 0.0, 1.0, 1e-14, 1e-11, 20000);
  const auto lv1 = integrate_to_infinity(levy, 1.0, 1e-14, 1e-11);
  if (!lv0.converged || !lv1.converged) throw NumericalError("Levy integral did not converge");
  out.levy_bound = std::pow(R, -dim) * (lv0.value + lv1.value);
  out.bound_holds = out.mass <= out.levy_bound * (1.0 + 1e-9);
  return out;
}

TildeNu tilde_nu(const std::function<double(double)>& nu_radial, const Domain& omega) {
  return tilde_nu(nu_radial, omega.dim(), std::max(1.0, omega.containing_radius()));
}

}  // namespace mosco
