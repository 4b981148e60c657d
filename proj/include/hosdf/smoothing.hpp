#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "hosdf/grid.hpp"

namespace hosdf {

/// Sampled Gaussian of standard deviation `sigma` (physical units) on a grid
/// with spacing `h`, truncated at radius ceil(3 sigma / h) and normalised to
/// sum 1. Entry r holds the weight at offset r - radius.
inline std::vector<double> gaussian_kernel(double sigma, double h) {
  if (sigma < 0.0) throw std::invalid_argument("gaussian sigma must be non-negative");
  if (sigma == 0.0) return {1.0};
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma / h));
  std::vector<double> w(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (std::ptrdiff_t r = -radius; r <= radius; ++r) {
    const double x = static_cast<double>(r) * h;
    w[static_cast<std::size_t>(r + radius)] = std::exp(-0.5 * x * x / (sigma * sigma));
  }
  for (double v : w) sum += v;
  for (double& v : w) v /= sum;
  return w;
}

/// Convolves every line along `axis` with `kernel` (odd length, centred),
/// mirror boundaries.
inline ScalarField convolve_axis(const ScalarField& in, int axis, const std::vector<double>& kernel) {
  const auto& g = in.geometry();
  const auto radius = static_cast<std::ptrdiff_t>(kernel.size() / 2);
  if (radius == 0) return in;
  ScalarField out(g);
  const auto n = g.dims[axis];
  std::vector<double> line(static_cast<std::size_t>(n));
  const std::ptrdiff_t stride = axis == 0 ? 1 : (axis == 1 ? g.dims[0] : g.dims[0] * g.dims[1]);
  const int a1 = axis == 0 ? 1 : 0;
  const int a2 = axis == 2 ? 1 : 2;
  for (std::ptrdiff_t v = 0; v < g.dims[a2]; ++v) {
    for (std::ptrdiff_t u = 0; u < g.dims[a1]; ++u) {
      Index3 start{0, 0, 0};
      start[a1] = u;
      start[a2] = v;
      const std::size_t base = g.linear(start);
      for (std::ptrdiff_t t = 0; t < n; ++t) line[static_cast<std::size_t>(t)] = in[base + static_cast<std::size_t>(t * stride)];
      for (std::ptrdiff_t t = 0; t < n; ++t) {
        double acc = 0.0;
        for (std::ptrdiff_t r = -radius; r <= radius; ++r)
          acc += kernel[static_cast<std::size_t>(r + radius)] * line[static_cast<std::size_t>(mirror_index(t + r, n))];
        out[base + static_cast<std::size_t>(t * stride)] = acc;
      }
    }
  }
  return out;
}

/// Separable Gaussian blur, sigma in physical units. sigma = 0 is the identity.
inline ScalarField gaussian_smooth(const ScalarField& field, double sigma) {
  if (sigma < 0.0 || !std::isfinite(sigma)) throw std::invalid_argument("gaussian sigma must be non-negative");
  if (sigma == 0.0) return field;
  ScalarField out = field;
  for (int axis = 0; axis < 3; ++axis)
    out = convolve_axis(out, axis, gaussian_kernel(sigma, field.geometry().spacing[axis]));
  return out;
}

} // namespace hosdf
