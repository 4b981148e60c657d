#pragma once

#include <stdexcept>
#include <vector>

#include "hosdf/grid.hpp"

namespace hosdf {

/// Composite Simpson weights for n samples at spacing h. An even sample
/// count integrates the first n-1 samples with Simpson and closes the last
/// interval with the trapezoid rule. n = 2 is the trapezoid rule; n = 1 is a
/// collapsed axis with unit weight (the integral is over the remaining axes).
inline std::vector<double> simpson_weights(std::ptrdiff_t n, double h) {
  if (n < 1) throw std::invalid_argument("simpson_weights: need at least one sample");
  std::vector<double> w(static_cast<std::size_t>(n), 0.0);
  if (n == 1) {
    w[0] = 1.0;
    return w;
  }
  if (n == 2) {
    w[0] = w[1] = 0.5 * h;
    return w;
  }
  const std::ptrdiff_t m = (n % 2 == 1) ? n : n - 1; // odd sample count covered by Simpson
  for (std::ptrdiff_t i = 0; i < m; ++i) {
    double c = (i == 0 || i == m - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    w[static_cast<std::size_t>(i)] = c * h / 3.0;
  }
  if (m != n) {
    w[static_cast<std::size_t>(n - 2)] += 0.5 * h;
    w[static_cast<std::size_t>(n - 1)] += 0.5 * h;
  }
  return w;
}

/// Separable Simpson quadrature weights for a grid.
struct SimpsonWeights {
  std::array<std::vector<double>, 3> axis;

  explicit SimpsonWeights(const GridGeometry& g) {
    for (int a = 0; a < 3; ++a) axis[a] = simpson_weights(g.dims[a], g.spacing[a]);
  }
  double operator()(std::ptrdiff_t i, std::ptrdiff_t j, std::ptrdiff_t k) const {
    return axis[0][static_cast<std::size_t>(i)] * axis[1][static_cast<std::size_t>(j)] *
           axis[2][static_cast<std::size_t>(k)];
  }
};

/// Integral of `integrand(i, j, k, linear)` over the grid extent. Summation
/// runs line by line in x-fastest order so the result is reproducible.
template <typename F>
double integrate_simpson(const GridGeometry& g, F&& integrand) {
  const SimpsonWeights w(g);
  double total = 0.0;
  std::size_t n = 0;
  for (std::ptrdiff_t k = 0; k < g.dims[2]; ++k) {
    double plane = 0.0;
    for (std::ptrdiff_t j = 0; j < g.dims[1]; ++j) {
      double line = 0.0;
      for (std::ptrdiff_t i = 0; i < g.dims[0]; ++i, ++n) {
        const double f = integrand(i, j, k, n);
        if (f != 0.0) line += w.axis[0][static_cast<std::size_t>(i)] * f;
      }
      plane += w.axis[1][static_cast<std::size_t>(j)] * line;
    }
    total += w.axis[2][static_cast<std::size_t>(k)] * plane;
  }
  return total;
}

inline double integrate_simpson(const ScalarField& field) {
  return integrate_simpson(field.geometry(), [&](auto, auto, auto, std::size_t n) { return field[n]; });
}

} // namespace hosdf
