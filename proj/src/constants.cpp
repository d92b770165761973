#include "mosco/constants.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mosco {

double sphere_area(int d) {
  if (d < 1) throw std::domain_error("dimension must be positive");
  return 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
}

double fractional_constant(int d, double alpha) {
  if (d < 1) throw std::domain_error("dimension must be positive");
  if (!(alpha > 0.0 && alpha < 2.0)) throw std::domain_error("alpha must lie in (0, 2)");
  // lgamma keeps Gamma(1 - alpha/2) finite-precision friendly near alpha = 2.
  const double log_num = std::log(alpha) + (alpha - 1.0) * std::log(2.0) + std::lgamma(0.5 * (d + alpha));
  const double log_den = 0.5 * d * std::log(std::numbers::pi) + std::lgamma(1.0 - 0.5 * alpha);
  return std::exp(log_num - log_den);
}

double normalization_ratio(int d, double alpha) {
  return fractional_constant(d, alpha) / (2.0 * d * sphere_area(d) * (2.0 - alpha));
}

double normalization_ratio_corrected(int d, double alpha) {
  return fractional_constant(d, alpha) * sphere_area(d) / (2.0 * d * (2.0 - alpha));
}

}  // namespace mosco
