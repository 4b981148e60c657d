#pragma once

// Fourth-order central differences with mirror boundaries.
//   first:  (f[-2] - 8 f[-1] + 8 f[1] - f[2]) / 12h
//   second: (-f[-2] + 16 f[-1] - 30 f[0] + 16 f[1] - f[2]) / 12h^2
//   mixed:  tensor product of two first-derivative stencils

#include <array>
#include <stdexcept>

#include "hosdf/grid.hpp"

namespace hosdf {

/// Symmetric 3x3 Hessian stored as xx, yy, zz, xy, xz, yz.
struct Hessian {
  double xx = 0, yy = 0, zz = 0, xy = 0, xz = 0, yz = 0;

  double operator()(int a, int b) const {
    if (a == b) return a == 0 ? xx : (a == 1 ? yy : zz);
    if (a > b) std::swap(a, b);
    return a == 0 ? (b == 1 ? xy : xz) : yz;
  }
  double trace() const { return xx + yy + zz; }
};

struct LocalDerivatives {
  double value = 0;
  Vec3 gradient;
  Hessian hessian;
};

namespace detail {
constexpr std::array<double, 5> kFirst4{1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0};
constexpr std::array<double, 5> kSecond4{-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0};
} // namespace detail

inline void require_stencil_fits(const GridGeometry& g) {
  for (int a = 0; a < 3; ++a)
    if (g.dims[a] < 5) throw std::invalid_argument("fourth-order stencils need at least 5 voxels per axis");
}

/// Gradient and Hessian at one voxel. Interior voxels skip the mirror lookup.
inline LocalDerivatives derivatives4_at(const ScalarField& f, std::ptrdiff_t i, std::ptrdiff_t j, std::ptrdiff_t k) {
  using detail::kFirst4;
  using detail::kSecond4;
  const auto& g = f.geometry();
  const auto& d = g.dims;
  const bool interior = i >= 2 && j >= 2 && k >= 2 && i < d[0] - 2 && j < d[1] - 2 && k < d[2] - 2;

  // 5x5x5 neighbourhood restricted to the three axis lines and three planes.
  auto at = [&](std::ptrdiff_t di, std::ptrdiff_t dj, std::ptrdiff_t dk) -> double {
    return interior ? f(i + di, j + dj, k + dk) : f.mirrored(i + di, j + dj, k + dk);
  };

  LocalDerivatives out;
  out.value = f(i, j, k);
  double gx = 0, gy = 0, gz = 0, hxx = 0, hyy = 0, hzz = 0;
  for (int s = 0; s < 5; ++s) {
    const std::ptrdiff_t o = s - 2;
    const double fx = at(o, 0, 0), fy = at(0, o, 0), fz = at(0, 0, o);
    gx += kFirst4[s] * fx;
    gy += kFirst4[s] * fy;
    gz += kFirst4[s] * fz;
    hxx += kSecond4[s] * fx;
    hyy += kSecond4[s] * fy;
    hzz += kSecond4[s] * fz;
  }
  double hxy = 0, hxz = 0, hyz = 0;
  for (int s = 0; s < 5; ++s) {
    if (s == 2) continue;
    for (int t = 0; t < 5; ++t) {
      if (t == 2) continue;
      const double w = kFirst4[s] * kFirst4[t];
      hxy += w * at(s - 2, t - 2, 0);
      hxz += w * at(s - 2, 0, t - 2);
      hyz += w * at(0, s - 2, t - 2);
    }
  }
  const double hx = g.spacing[0], hy = g.spacing[1], hz = g.spacing[2];
  out.gradient = {gx / hx, gy / hy, gz / hz};
  out.hessian = {hxx / (hx * hx), hyy / (hy * hy), hzz / (hz * hz), hxy / (hx * hy), hxz / (hx * hz), hyz / (hy * hz)};
  return out;
}

/// Whole-grid gradient and Hessian fields.
struct DerivativeFields {
  std::array<ScalarField, 3> gradient;
  /// xx, yy, zz, xy, xz, yz
  std::array<ScalarField, 6> hessian;
};

inline DerivativeFields derivatives4(const ScalarField& f) {
  const auto& g = f.geometry();
  require_stencil_fits(g);
  DerivativeFields out;
  for (auto& c : out.gradient) c = ScalarField(g);
  for (auto& c : out.hessian) c = ScalarField(g);
  for_each_voxel(g, [&](auto i, auto j, auto k, std::size_t n) {
    const LocalDerivatives d = derivatives4_at(f, i, j, k);
    out.gradient[0][n] = d.gradient.x;
    out.gradient[1][n] = d.gradient.y;
    out.gradient[2][n] = d.gradient.z;
    out.hessian[0][n] = d.hessian.xx;
    out.hessian[1][n] = d.hessian.yy;
    out.hessian[2][n] = d.hessian.zz;
    out.hessian[3][n] = d.hessian.xy;
    out.hessian[4][n] = d.hessian.xz;
    out.hessian[5][n] = d.hessian.yz;
  });
  return out;
}

} // namespace hosdf
