#pragma once

// High-order narrowband: voxels straddling the zero level set of an implicit
// embedding psi (inside negative) are projected onto the interpolated surface
// by integrating through the normalised gradient field, then corrected along
// the tangent plane until the displacement is collinear with the normal.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

#include "hosdf/bspline.hpp"
#include "hosdf/grid.hpp"

namespace hosdf {

/// Band of voxels (dilation minus erosion of psi < 0) by an axis cross of
/// radius (stencil_size - 1) / 2. Out-of-grid voxels are ignored by both
/// operators.
inline MaskField select_narrowband(const ScalarField& psi, int stencil_size = 5) {
  if (stencil_size < 3 || stencil_size % 2 == 0) throw std::invalid_argument("stencil size must be odd and >= 3");
  const std::ptrdiff_t radius = (stencil_size - 1) / 2;
  const auto& g = psi.geometry();
  MaskField inside(g);
  for (std::size_t n = 0; n < psi.size(); ++n) inside[n] = psi[n] < 0.0;

  MaskField dilated(g, 0);
  MaskField eroded(g, 1);
  for (int axis = 0; axis < 3; ++axis) {
    const auto len = g.dims[axis];
    const std::ptrdiff_t stride = axis == 0 ? 1 : (axis == 1 ? g.dims[0] : g.dims[0] * g.dims[1]);
    // Nearest inside / outside voxel along the line, measured in voxels.
    std::vector<std::ptrdiff_t> near_in(static_cast<std::size_t>(len)), near_out(static_cast<std::size_t>(len));
    const int a1 = axis == 0 ? 1 : 0;
    const int a2 = axis == 2 ? 1 : 2;
    for (std::ptrdiff_t v = 0; v < g.dims[a2]; ++v) {
      for (std::ptrdiff_t u = 0; u < g.dims[a1]; ++u) {
        Index3 start{0, 0, 0};
        start[a1] = u;
        start[a2] = v;
        const std::size_t base = g.linear(start);
        auto at = [&](std::ptrdiff_t t) { return inside[base + static_cast<std::size_t>(t * stride)] != 0; };
        constexpr std::ptrdiff_t far = std::numeric_limits<std::ptrdiff_t>::max() / 4;
        std::ptrdiff_t last_in = -far, last_out = -far;
        for (std::ptrdiff_t t = 0; t < len; ++t) {
          if (at(t)) last_in = t;
          else last_out = t;
          near_in[static_cast<std::size_t>(t)] = t - last_in;
          near_out[static_cast<std::size_t>(t)] = t - last_out;
        }
        last_in = last_out = far + len;
        for (std::ptrdiff_t t = len - 1; t >= 0; --t) {
          if (at(t)) last_in = t;
          else last_out = t;
          auto& ni = near_in[static_cast<std::size_t>(t)];
          auto& no = near_out[static_cast<std::size_t>(t)];
          ni = std::min(ni, last_in - t);
          no = std::min(no, last_out - t);
        }
        for (std::ptrdiff_t t = 0; t < len; ++t) {
          const std::size_t n = base + static_cast<std::size_t>(t * stride);
          if (near_in[static_cast<std::size_t>(t)] <= radius) dilated[n] = 1;
          if (near_out[static_cast<std::size_t>(t)] <= radius) eroded[n] = 0;
        }
      }
    }
  }
  MaskField band(g, 0);
  for (std::size_t n = 0; n < band.size(); ++n) band[n] = dilated[n] && !eroded[n];
  return band;
}

/// psi / sqrt(psi^2 + |grad psi|^2 delta^2); 0 when both psi and the
/// gradient vanish.
inline double regularized_sign(double psi, double grad_mag, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("sign regularisation must be positive");
  if (grad_mag < 0.0) throw std::invalid_argument("gradient magnitude must be non-negative");
  const double den = std::sqrt(psi * psi + grad_mag * grad_mag * delta * delta);
  return den == 0.0 ? 0.0 : psi / den;
}

struct CPConfig {
  double step = 0.0;      ///< integration step (lambda); 0 means h
  double delta = 0.0;     ///< sign regularisation; 0 means h
  double tolerance = 0.0; ///< surface / collinearity tolerance; 0 means tolerance_scale * h^3
  double tolerance_scale = 1e-6;
  double beta = 0.5;      ///< tangent-plane step fraction
  int max_iters = 100;    ///< cap for each of the two loops

  /// Fills the spacing-dependent defaults for minimum spacing h.
  CPConfig resolved(double h) const {
    CPConfig c = *this;
    if (c.step <= 0.0) c.step = h;
    if (c.delta <= 0.0) c.delta = h;
    if (c.tolerance <= 0.0) {
      if (!(c.tolerance_scale > 0.0)) throw std::invalid_argument("tolerance_scale must be positive");
      c.tolerance = c.tolerance_scale * h * h * h;
    }
    if (!(c.beta > 0.0 && c.beta <= 1.0)) throw std::invalid_argument("beta must lie in (0, 1]");
    if (c.max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
    return c;
  }
};

struct ClosestPointResult {
  Vec3 point;
  bool converged = false;
  int iterations = 0;       ///< gradient-flow steps (summed over restarts for the collinear variant)
  int outer_iterations = 0; ///< tangent-plane corrections (collinear variant only)
  double tangent_residual = 0.0;
};

/// Surface test |psi(y)| <= tol |grad psi(y)|.
inline bool on_surface(const ValueGradient& s, double tol) { return std::abs(s.value) <= tol * norm(s.gradient); }

/// Flows `x` onto the zero level set along the regularised-sign normal field.
/// `cfg` must already be resolved.
inline ClosestPointResult closest_point(const SplineInterpolant& interp, const Vec3& x, const CPConfig& cfg) {
  ClosestPointResult r;
  r.point = x;
  for (;;) {
    const ValueGradient s = interp.eval_with_gradient(r.point);
    const double gm = norm(s.gradient);
    if (std::abs(s.value) <= cfg.tolerance * gm) {
      r.converged = true;
      return r;
    }
    if (r.iterations >= cfg.max_iters || gm == 0.0) return r;
    const double sgn = regularized_sign(s.value, gm, cfg.delta);
    r.point -= s.gradient * (cfg.step * sgn / gm);
    ++r.iterations;
  }
}

inline ClosestPointResult closest_point(const SplineInterpolant& interp, const Vec3& x) {
  return closest_point(interp, x, CPConfig{}.resolved(interp.geometry().min_spacing()));
}

/// Closest point whose displacement from `x` is parallel to the surface
/// normal: the tangential part of (x - y) is fed back with weight beta until
/// it is shorter than the tolerance. `cfg` must already be resolved.
inline ClosestPointResult collinear_closest_point(const SplineInterpolant& interp, const Vec3& x, const CPConfig& cfg) {
  ClosestPointResult r = closest_point(interp, x, cfg);
  if (!r.converged) return r;
  for (;;) {
    const ValueGradient s = interp.eval_with_gradient(r.point);
    const double gm = norm(s.gradient);
    if (gm == 0.0) {
      r.converged = false;
      return r;
    }
    const Vec3 n = s.gradient * (1.0 / gm);
    const Vec3 q = x - r.point;
    const Vec3 z = q - n * dot(q, n);
    r.tangent_residual = norm(z);
    const ClosestPointResult inner = closest_point(interp, r.point + z * cfg.beta, cfg);
    r.iterations += inner.iterations;
    ++r.outer_iterations;
    r.point = inner.point;
    if (!inner.converged) {
      r.converged = false;
      return r;
    }
    if (r.tangent_residual <= cfg.tolerance) {
      r.converged = true;
      return r;
    }
    if (r.outer_iterations >= cfg.max_iters) {
      r.converged = false;
      return r;
    }
  }
}

inline ClosestPointResult collinear_closest_point(const SplineInterpolant& interp, const Vec3& x) {
  return collinear_closest_point(interp, x, CPConfig{}.resolved(interp.geometry().min_spacing()));
}

struct NarrowbandVoxel {
  std::size_t index = 0;
  double distance = 0.0; ///< signed, inside negative
  Vec3 closest;
  int iterations = 0;
  int outer_iterations = 0;
};

struct NarrowbandSolution {
  MaskField mask;
  std::vector<NarrowbandVoxel> solved;  ///< ascending voxel index
  std::vector<std::size_t> fallback;    ///< voxels left to the sweeping stage
  std::map<int, std::size_t> inner_histogram; ///< gradient-flow steps per voxel
  std::map<int, std::size_t> outer_histogram; ///< tangent corrections per voxel

  /// Dense view: solved distances, `fill` elsewhere.
  ScalarField to_field(double fill = 0.0) const {
    ScalarField f(mask.geometry(), fill);
    for (const auto& v : solved) f[v.index] = v.distance;
    return f;
  }
};

/// Solves every masked voxel with the collinear closest point iteration.
/// Voxels that do not converge go to `fallback` without a value.
inline NarrowbandSolution solve_narrowband(const ScalarField& psi, const SplineInterpolant& interp, const MaskField& mask,
                                           const CPConfig& config = {}) {
  require_same_geometry(psi, mask, "solve_narrowband");
  const auto& g = psi.geometry();
  const CPConfig cfg = config.resolved(g.min_spacing());

  std::vector<std::size_t> voxels;
  for (std::size_t n = 0; n < mask.size(); ++n)
    if (mask[n]) voxels.push_back(n);
  if (voxels.empty()) throw std::invalid_argument("solve_narrowband: empty narrowband");

  std::vector<NarrowbandVoxel> results(voxels.size());
  std::vector<std::uint8_t> ok(voxels.size(), 0);
  const auto count_voxels = static_cast<std::ptrdiff_t>(voxels.size());
#pragma omp parallel for schedule(dynamic, 256)
  for (std::ptrdiff_t m = 0; m < count_voxels; ++m) {
    const std::size_t n = voxels[static_cast<std::size_t>(m)];
    const Vec3 x = g.world(g.unravel(n));
    NarrowbandVoxel& out = results[static_cast<std::size_t>(m)];
    out.index = n;
    if (psi[n] == 0.0) {
      out.closest = x;
      ok[static_cast<std::size_t>(m)] = 1;
      continue;
    }
    const ClosestPointResult cp = collinear_closest_point(interp, x, cfg);
    out.closest = cp.point;
    out.iterations = cp.iterations;
    out.outer_iterations = cp.outer_iterations;
    if (!cp.converged) continue;
    const double d = norm(x - cp.point);
    out.distance = psi[n] < 0.0 ? -d : d;
    ok[static_cast<std::size_t>(m)] = 1;
  }

  NarrowbandSolution sol;
  sol.mask = mask;
  for (std::size_t m = 0; m < results.size(); ++m) {
    ++sol.inner_histogram[results[m].iterations];
    ++sol.outer_histogram[results[m].outer_iterations];
    if (ok[m]) sol.solved.push_back(results[m]);
    else sol.fallback.push_back(results[m].index);
  }
  return sol;
}

inline NarrowbandSolution solve_narrowband(const ScalarField& psi, const MaskField& mask, const CPConfig& config = {}) {
  return solve_narrowband(psi, SplineInterpolant(psi, 3), mask, config);
}

} // namespace hosdf
