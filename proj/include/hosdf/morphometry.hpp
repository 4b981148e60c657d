#pragma once

// Curvatures of an embedding and integral morphometry over its zero level
// set, using regularised Heaviside/Dirac kernels and Simpson quadrature.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "hosdf/error.hpp"
#include "hosdf/finite_differences.hpp"
#include "hosdf/grid.hpp"
#include "hosdf/heaviside.hpp"
#include "hosdf/quadrature.hpp"

namespace hosdf {

struct Curvatures {
  double mean = 0.0;     ///< H = (k1 + k2) / 2, positive on convex parts of the inside
  double gaussian = 0.0; ///< K = k1 k2
  bool degenerate = false;
};

inline constexpr double kMinGradient = 1e-8;

/// Level-set curvatures from a gradient and Hessian.
inline Curvatures curvatures_from(const Vec3& g, const Hessian& hs) {
  const double g2 = dot(g, g);
  const double gm = std::sqrt(g2);
  if (gm < kMinGradient) return {0.0, 0.0, true};
  const double gHg = hs.xx * g.x * g.x + hs.yy * g.y * g.y + hs.zz * g.z * g.z +
                     2.0 * (hs.xy * g.x * g.y + hs.xz * g.x * g.z + hs.yz * g.y * g.z);
  const double mean = (g2 * hs.trace() - gHg) / (2.0 * g2 * gm);

  const double axx = hs.yy * hs.zz - hs.yz * hs.yz;
  const double ayy = hs.xx * hs.zz - hs.xz * hs.xz;
  const double azz = hs.xx * hs.yy - hs.xy * hs.xy;
  const double axy = hs.xz * hs.yz - hs.xy * hs.zz;
  const double axz = hs.xy * hs.yz - hs.xz * hs.yy;
  const double ayz = hs.xy * hs.xz - hs.xx * hs.yz;
  const double gAg = axx * g.x * g.x + ayy * g.y * g.y + azz * g.z * g.z +
                     2.0 * (axy * g.x * g.y + axz * g.x * g.z + ayz * g.y * g.z);
  return {mean, gAg / (g2 * g2), false};
}

struct CurvatureFields {
  ScalarField mean;
  ScalarField gaussian;
  std::size_t degenerate = 0; ///< voxels with |grad phi| below kMinGradient, set to 0
};

inline CurvatureFields curvature_fields(const ScalarField& phi) {
  const auto& g = phi.geometry();
  require_stencil_fits(g);
  CurvatureFields out{ScalarField(g), ScalarField(g), 0};
  for_each_voxel(g, [&](auto i, auto j, auto k, std::size_t n) {
    const LocalDerivatives d = derivatives4_at(phi, i, j, k);
    const Curvatures c = curvatures_from(d.gradient, d.hessian);
    out.mean[n] = c.mean;
    out.gaussian[n] = c.gaussian;
    out.degenerate += c.degenerate;
  });
  return out;
}

struct MorphometryReport {
  double V = 0;       ///< enclosed volume
  double A = 0;       ///< surface area
  double mean_H = 0;  ///< area-averaged mean curvature
  double mean_K = 0;  ///< area-averaged Gaussian curvature
  double total_H = 0; ///< integrated mean curvature
  double total_K = 0; ///< integrated Gaussian curvature
  double chi = 0;     ///< Euler characteristic, total_K / 2 pi
  double tv = 0;      ///< total (grid) volume
  double bv = 0, bs = 0, bvtv = 0, smi = 0, tbpf = 0, connd = 0;
  double eps = 0;
  std::size_t clamped = 0;    ///< curvature samples limited to |H| <= 2/h, |K| <= 4/h^2
  std::size_t degenerate = 0; ///< band voxels with vanishing gradient
};

/// Fills BV, BS, BV/TV, SMI, TBPf and Conn.D from the integral measures.
inline MorphometryReport bone_metrics(MorphometryReport r) {
  if (!(r.A > 0.0)) throw NumericalError("bone metrics need a non-empty surface");
  r.bv = r.V;
  r.bs = r.A;
  r.bvtv = r.tv > 0.0 ? r.V / r.tv : 0.0;
  r.smi = 12.0 * r.mean_H * r.bv / r.bs;
  r.tbpf = 2.0 * r.mean_H;
  r.connd = (1.0 - r.chi) / r.tv;
  return r;
}

/// V, A, total curvatures and TV only; no averages (valid for empty surfaces).
inline MorphometryReport measure_integrals(const ScalarField& phi, double eps) {
  const auto& g = phi.geometry();
  require_stencil_fits(g);
  const double h = g.min_spacing();
  if (!(eps > 0.0)) throw std::invalid_argument("measure: eps must be positive");
  const double h_cap = 2.0 / h, k_cap = 4.0 / (h * h);

  const SimpsonWeights w(g);
  MorphometryReport r;
  r.eps = eps;
  // Line-by-line sums keep the summation order fixed.
  for (std::ptrdiff_t k = 0; k < g.dims[2]; ++k) {
    double pv = 0, pa = 0, ph = 0, pk = 0, pt = 0;
    for (std::ptrdiff_t j = 0; j < g.dims[1]; ++j) {
      double lv = 0, la = 0, lh = 0, lk = 0, lt = 0;
      for (std::ptrdiff_t i = 0; i < g.dims[0]; ++i) {
        const double wx = w.axis[0][static_cast<std::size_t>(i)];
        const double f = phi(i, j, k);
        lt += wx;
        lv += wx * heaviside_eps(-f, eps);
        const double delta = dirac_eps(f, eps);
        if (delta == 0.0) continue;
        const LocalDerivatives d = derivatives4_at(phi, i, j, k);
        const double gm = norm(d.gradient);
        Curvatures c = curvatures_from(d.gradient, d.hessian);
        r.degenerate += c.degenerate;
        if (std::abs(c.mean) > h_cap) {
          c.mean = std::copysign(h_cap, c.mean);
          ++r.clamped;
        }
        if (std::abs(c.gaussian) > k_cap) {
          c.gaussian = std::copysign(k_cap, c.gaussian);
          ++r.clamped;
        }
        const double surf = wx * delta * gm;
        la += surf;
        lh += surf * c.mean;
        lk += surf * c.gaussian;
      }
      const double wy = w.axis[1][static_cast<std::size_t>(j)];
      pv += wy * lv;
      pa += wy * la;
      ph += wy * lh;
      pk += wy * lk;
      pt += wy * lt;
    }
    const double wz = w.axis[2][static_cast<std::size_t>(k)];
    r.V += wz * pv;
    r.A += wz * pa;
    r.total_H += wz * ph;
    r.total_K += wz * pk;
    r.tv += wz * pt;
  }
  r.chi = r.total_K / (2.0 * std::numbers::pi);
  return r;
}

/// Full report including area-normalised averages and bone metrics.
inline MorphometryReport measure(const ScalarField& phi, double eps) {
  MorphometryReport r = measure_integrals(phi, eps);
  if (!(r.A > 0.0)) throw NumericalError("measure: the zero level set is empty (A = 0)");
  r.mean_H = r.total_H / r.A;
  r.mean_K = r.total_K / r.A;
  return bone_metrics(r);
}

/// Default regularisation width, 2h.
inline MorphometryReport measure(const ScalarField& phi) { return measure(phi, 2.0 * phi.geometry().min_spacing()); }

} // namespace hosdf
