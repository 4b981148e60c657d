#pragma once

// Analytic test surfaces (inside negative) and the biphasic density built
// from them.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

#include "hosdf/grid.hpp"
#include "hosdf/heaviside.hpp"

namespace hosdf {

enum class SurfaceKind { Sphere, Torus, DoubleSpheres, Cylinder, Slab };

struct AnalyticSurface {
  SurfaceKind kind = SurfaceKind::Sphere;
  double r = 5.0;   ///< sphere / double-sphere / cylinder radius, slab half-thickness
  double a = 2.0;   ///< torus tube radius
  double c = 3.0;   ///< torus centre-line radius
  double d = 0.0;   ///< double-sphere centre separation
  Vec3 center{};    ///< translation applied to the whole surface

  static AnalyticSurface sphere(double radius, Vec3 centre = {}) { return {SurfaceKind::Sphere, radius, 0, 0, 0, centre}; }
  static AnalyticSurface torus(double tube, double ring, Vec3 centre = {}) {
    return {SurfaceKind::Torus, 0, tube, ring, 0, centre};
  }
  static AnalyticSurface double_spheres(double radius, double separation, Vec3 centre = {}) {
    return {SurfaceKind::DoubleSpheres, radius, 0, 0, separation, centre};
  }
  /// Infinite cylinder along z.
  static AnalyticSurface cylinder(double radius, Vec3 centre = {}) { return {SurfaceKind::Cylinder, radius, 0, 0, 0, centre}; }
  /// Slab |x| <= half_thickness.
  static AnalyticSurface slab(double half_thickness, Vec3 centre = {}) {
    return {SurfaceKind::Slab, half_thickness, 0, 0, 0, centre};
  }

  void validate() const {
    switch (kind) {
      case SurfaceKind::Torus:
        if (!(a > 0 && c > a)) throw std::invalid_argument("torus needs 0 < a < c");
        break;
      case SurfaceKind::DoubleSpheres:
        if (!(r > 0 && d > 0)) throw std::invalid_argument("double spheres need r > 0 and d > 0");
        break;
      default:
        if (!(r > 0)) throw std::invalid_argument("surface radius must be positive");
    }
  }

  /// Exact signed distance at a world point. For intersecting double
  /// spheres the inside distance is measured to the union boundary, whose
  /// nearest point may lie on the rim circle where the spheres meet.
  double signed_distance(const Vec3& p) const {
    const Vec3 q = p - center;
    switch (kind) {
      case SurfaceKind::Sphere: return norm(q) - r;
      case SurfaceKind::Torus: {
        const double rho = std::hypot(q.x, q.y) - c;
        return std::hypot(rho, q.z) - a;
      }
      case SurfaceKind::DoubleSpheres: return double_sphere_distance(q);
      case SurfaceKind::Cylinder: return std::hypot(q.x, q.y) - r;
      case SurfaceKind::Slab: return std::abs(q.x) - r;
    }
    return 0.0;
  }

private:
  // Centres at -/+ d/2 on x. Each sphere contributes the cap lying outside
  // the other one; caps meet on the circle x = 0, radius sqrt(r^2 - d^2/4).
  double double_sphere_distance(const Vec3& q) const {
    const double half = 0.5 * d;
    const double da = norm(q + Vec3{half, 0, 0});
    const double db = norm(q - Vec3{half, 0, 0});
    const double outside = std::min(da, db) - r;
    if (outside >= 0.0 || half >= r) return outside;
    const double rim = std::sqrt(r * r - half * half);
    const double rho = std::hypot(q.y, q.z);
    const double to_rim = std::hypot(q.x, rho - rim);
    // Cap of the sphere centred at sign*half: points with sign*x >= 0.
    auto cap = [&](double sign, double dist) {
      if (dist == 0.0) return r;
      const double proj_x = sign * half + r * (q.x - sign * half) / dist;
      return sign * proj_x >= 0.0 ? std::abs(dist - r) : to_rim;
    };
    return -std::min(cap(-1.0, da), cap(1.0, db));
  }
};

inline std::string_view surface_name(SurfaceKind k) {
  switch (k) {
    case SurfaceKind::Sphere: return "sphere";
    case SurfaceKind::Torus: return "torus";
    case SurfaceKind::DoubleSpheres: return "double_spheres";
    case SurfaceKind::Cylinder: return "cylinder";
    case SurfaceKind::Slab: return "slab";
  }
  return "?";
}

/// The reference surfaces used by the verification studies.
inline AnalyticSurface reference_surface(std::string_view name) {
  if (name == "sphere") return AnalyticSurface::sphere(5.0);
  if (name == "torus") return AnalyticSurface::torus(2.0, 3.0);
  if (name == "double_spheres" || name == "double-spheres") return AnalyticSurface::double_spheres(5.0, 3.0 * std::sqrt(3.0));
  if (name == "cylinder") return AnalyticSurface::cylinder(3.0);
  if (name == "slab") return AnalyticSurface::slab(2.0);
  throw std::invalid_argument("unknown surface '" + std::string(name) + "'");
}

/// The cube [-half_width, half_width]^3 sampled with both end points, so
/// halving h nests the grids.
inline GridGeometry phantom_geometry(double h, double half_width = 10.0) {
  if (!(h > 0.0)) throw std::invalid_argument("phantom spacing must be positive");
  const double cells = 2.0 * half_width / h;
  const double rounded = std::round(cells);
  if (std::abs(cells - rounded) > 1e-9 * cells) throw std::invalid_argument("phantom width must be a multiple of h");
  const auto n = static_cast<std::ptrdiff_t>(rounded) + 1;
  return GridGeometry({n, n, n}, {h, h, h}, {-half_width, -half_width, -half_width});
}

inline ScalarField analytic_sdf(const AnalyticSurface& s, const GridGeometry& g) {
  s.validate();
  ScalarField phi(g);
  for_each_voxel(g, [&](auto i, auto j, auto k, std::size_t n) { phi[n] = s.signed_distance(g.world(i, j, k)); });
  return phi;
}

/// rho = rho1 H(-phi) + rho2 (1 - H(-phi)) with the regularised Heaviside.
inline ScalarField synth_density(const ScalarField& phi, double rho1, double rho2, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("synth_density: eps must be positive");
  ScalarField rho(phi.geometry());
  for (std::size_t n = 0; n < phi.size(); ++n) {
    const double t = heaviside_eps(-phi[n], eps);
    rho[n] = rho1 * t + rho2 * (1.0 - t);
  }
  return rho;
}

/// Convergence order from errors at spacing h and h/2.
inline double order_estimate(double err_h, double err_half) {
  if (!(err_h > 0.0) || !(err_half > 0.0)) throw std::invalid_argument("order_estimate needs positive errors");
  return std::log2(err_h / err_half);
}

inline double midphase_threshold(double rho1, double rho2) { return 0.5 * (rho1 + rho2); }

} // namespace hosdf
