#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hosdf {

/// Regularised Heaviside with support [-eps, eps]; C1 at the support ends.
inline double heaviside_eps(double x, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("heaviside width must be positive");
  if (x > eps) return 1.0;
  if (x < -eps) return 0.0;
  return 0.5 * (1.0 + x / eps + std::sin(std::numbers::pi * x / eps) / std::numbers::pi);
}

/// Derivative of heaviside_eps.
inline double dirac_eps(double x, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("dirac width must be positive");
  if (std::abs(x) > eps) return 0.0;
  return (1.0 + std::cos(std::numbers::pi * x / eps)) / (2.0 * eps);
}

} // namespace hosdf
