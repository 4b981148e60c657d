#pragma once

// Interpolating B-splines on a rectilinear grid (orders 1 and 3).
//
// Cubic coefficients come from the classic two-pass recursive prefilter
// (Unser; Thevenaz et al.) with whole-sample mirror boundary conditions, so
// the spline passes through every sample and is C2 everywhere.

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "hosdf/grid.hpp"

namespace hosdf {

struct ValueGradient {
  double value = 0.0;
  Vec3 gradient;
};

namespace detail {

inline constexpr double kCubicPole = -0.26794919243112270; // sqrt(3) - 2
inline constexpr double kPrefilterTolerance = 1e-12;

inline double causal_init(const double* c, std::ptrdiff_t n, std::ptrdiff_t stride, double z) {
  const auto horizon = static_cast<std::ptrdiff_t>(std::ceil(std::log(kPrefilterTolerance) / std::log(std::abs(z))));
  if (horizon < n) {
    double zn = z, sum = c[0];
    for (std::ptrdiff_t k = 1; k < horizon; ++k) {
      sum += zn * c[k * stride];
      zn *= z;
    }
    return sum;
  }
  // Exact mirror-symmetric sum for short lines.
  double zn = z;
  const double iz = 1.0 / z;
  double z2n = std::pow(z, static_cast<double>(n - 1));
  double sum = c[0] + z2n * c[(n - 1) * stride];
  z2n *= z2n * iz;
  for (std::ptrdiff_t k = 1; k < n - 1; ++k) {
    sum += (zn + z2n) * c[k * stride];
    zn *= z;
    z2n *= iz;
  }
  return sum / (1.0 - zn * zn);
}

inline void cubic_prefilter_line(double* c, std::ptrdiff_t n, std::ptrdiff_t stride) {
  if (n < 2) return;
  constexpr double z = kCubicPole;
  constexpr double gain = (1.0 - z) * (1.0 - 1.0 / z);
  for (std::ptrdiff_t k = 0; k < n; ++k) c[k * stride] *= gain;
  c[0] = causal_init(c, n, stride, z);
  for (std::ptrdiff_t k = 1; k < n; ++k) c[k * stride] += z * c[(k - 1) * stride];
  c[(n - 1) * stride] = (z / (z * z - 1.0)) * (z * c[(n - 2) * stride] + c[(n - 1) * stride]);
  for (std::ptrdiff_t k = n - 2; k >= 0; --k) c[k * stride] = z * (c[(k + 1) * stride] - c[k * stride]);
}

/// Reflects a continuous coordinate into [0, n-1]; `flipped` reports an odd
/// number of reflections (derivatives change sign).
inline double mirror_coordinate(double u, std::ptrdiff_t n, bool& flipped) {
  flipped = false;
  if (n == 1) return 0.0;
  const double last = static_cast<double>(n - 1);
  const double period = 2.0 * last;
  if (u >= 0.0 && u <= last) return u;
  double r = std::fmod(u, period);
  if (r < 0.0) r += period;
  // fmod keeps the reflection parity only through r > last.
  if (r > last) {
    flipped = true;
    r = period - r;
  }
  return r;
}

struct CubicWeights {
  std::array<std::ptrdiff_t, 4> index;
  std::array<double, 4> w;
  std::array<double, 4> dw;
};

inline CubicWeights cubic_weights(double u, std::ptrdiff_t n) {
  CubicWeights cw;
  auto base = static_cast<std::ptrdiff_t>(std::floor(u));
  if (base > n - 2) base = n - 2;
  if (base < 0) base = 0;
  const double t = u - static_cast<double>(base);
  const double s = 1.0 - t;
  cw.w = {s * s * s / 6.0, 2.0 / 3.0 - t * t + 0.5 * t * t * t, 2.0 / 3.0 - s * s + 0.5 * s * s * s, t * t * t / 6.0};
  cw.dw = {-0.5 * s * s, -2.0 * t + 1.5 * t * t, 2.0 * s - 1.5 * s * s, 0.5 * t * t};
  for (int m = 0; m < 4; ++m) cw.index[m] = mirror_index(base - 1 + m, n);
  return cw;
}

} // namespace detail

/// Continuous interpolant of a ScalarField. Immutable once built.
class SplineInterpolant {
public:
  SplineInterpolant(const ScalarField& samples, int order = 3) : order_(order), coefficients_(samples) {
    const auto& g = samples.geometry();
    if (order != 1 && order != 3) throw std::invalid_argument("spline order must be 1 or 3");
    for (int a = 0; a < 3; ++a)
      if (g.dims[a] < order + 1) throw std::invalid_argument("grid too small for requested spline order");
    if (order == 3) prefilter();
  }

  int order() const { return order_; }
  const GridGeometry& geometry() const { return coefficients_.geometry(); }
  const ScalarField& coefficients() const { return coefficients_; }

  /// Interpolated value at a world point; out-of-domain points are mirrored.
  double eval(const Vec3& p) const {
    if (order_ == 1) return eval_linear(p);
    return evaluate(p, false).value;
  }

  /// Analytic gradient of the cubic expansion, in world units.
  Vec3 eval_gradient(const Vec3& p) const {
    if (order_ != 3) throw std::logic_error("gradient requires a cubic interpolant");
    return evaluate(p, true).gradient;
  }

  ValueGradient eval_with_gradient(const Vec3& p) const {
    if (order_ != 3) throw std::logic_error("gradient requires a cubic interpolant");
    return evaluate(p, true);
  }

  /// True when `p` lies inside the sampled extent (no mirroring needed).
  bool inside(const Vec3& p) const {
    const Vec3 u = geometry().continuous_index(p);
    for (int a = 0; a < 3; ++a)
      if (u[a] < 0.0 || u[a] > static_cast<double>(geometry().dims[a] - 1)) return false;
    return true;
  }

private:
  void prefilter() {
    const auto& g = coefficients_.geometry();
    const auto& d = g.dims;
    double* c = coefficients_.values().data();
    for (std::ptrdiff_t k = 0; k < d[2]; ++k)
      for (std::ptrdiff_t j = 0; j < d[1]; ++j) detail::cubic_prefilter_line(c + g.linear(0, j, k), d[0], 1);
    for (std::ptrdiff_t k = 0; k < d[2]; ++k)
      for (std::ptrdiff_t i = 0; i < d[0]; ++i) detail::cubic_prefilter_line(c + g.linear(i, 0, k), d[1], d[0]);
    for (std::ptrdiff_t j = 0; j < d[1]; ++j)
      for (std::ptrdiff_t i = 0; i < d[0]; ++i)
        detail::cubic_prefilter_line(c + g.linear(i, j, 0), d[2], d[0] * d[1]);
  }

  ValueGradient evaluate(const Vec3& p, bool want_gradient) const {
    const auto& g = geometry();
    const Vec3 u = g.continuous_index(p);
    std::array<detail::CubicWeights, 3> cw;
    std::array<bool, 3> flipped{};
    for (int a = 0; a < 3; ++a) cw[a] = detail::cubic_weights(detail::mirror_coordinate(u[a], g.dims[a], flipped[a]), g.dims[a]);

    double v = 0.0, gx = 0.0, gy = 0.0, gz = 0.0;
    for (int c = 0; c < 4; ++c) {
      double pv = 0.0, pgx = 0.0, pgy = 0.0;
      for (int b = 0; b < 4; ++b) {
        const double* row = coefficients_.values().data() + g.linear(0, cw[1].index[b], cw[2].index[c]);
        double lv = 0.0, lgx = 0.0;
        for (int a = 0; a < 4; ++a) {
          const double coef = row[cw[0].index[a]];
          lv += cw[0].w[a] * coef;
          lgx += cw[0].dw[a] * coef;
        }
        pv += cw[1].w[b] * lv;
        if (want_gradient) {
          pgx += cw[1].w[b] * lgx;
          pgy += cw[1].dw[b] * lv;
        }
      }
      v += cw[2].w[c] * pv;
      if (want_gradient) {
        gx += cw[2].w[c] * pgx;
        gy += cw[2].w[c] * pgy;
        gz += cw[2].dw[c] * pv;
      }
    }
    ValueGradient out;
    out.value = v;
    if (want_gradient) {
      out.gradient = {gx / g.spacing[0], gy / g.spacing[1], gz / g.spacing[2]};
      for (int a = 0; a < 3; ++a)
        if (flipped[a]) out.gradient[a] = -out.gradient[a];
    }
    return out;
  }

  double eval_linear(const Vec3& p) const {
    const auto& g = geometry();
    const Vec3 u = g.continuous_index(p);
    std::array<std::array<std::ptrdiff_t, 2>, 3> idx;
    std::array<std::array<double, 2>, 3> w;
    for (int a = 0; a < 3; ++a) {
      bool flipped = false;
      const double m = detail::mirror_coordinate(u[a], g.dims[a], flipped);
      auto base = static_cast<std::ptrdiff_t>(std::floor(m));
      base = std::clamp<std::ptrdiff_t>(base, 0, std::max<std::ptrdiff_t>(g.dims[a] - 2, 0));
      const double t = m - static_cast<double>(base);
      idx[a] = {base, std::min(base + 1, g.dims[a] - 1)};
      w[a] = {1.0 - t, t};
    }
    double v = 0.0;
    for (int c = 0; c < 2; ++c)
      for (int b = 0; b < 2; ++b)
        for (int a = 0; a < 2; ++a)
          v += w[0][a] * w[1][b] * w[2][c] * coefficients_(idx[0][a], idx[1][b], idx[2][c]);
    return v;
  }

  int order_;
  ScalarField coefficients_;
};

inline SplineInterpolant build_spline(const ScalarField& field, int order = 3) { return SplineInterpolant(field, order); }

} // namespace hosdf
