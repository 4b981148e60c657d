#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "hosdf/narrowband.hpp"
#include "hosdf/phantom.hpp"
#include "test_support.hpp"

using namespace hosdf;
using hosdf::testing::random_field;

namespace {

/// Band membership straight from the definition: some in-grid voxel of the
/// cross (including the centre) is inside, and some is outside.
MaskField brute_band(const ScalarField& psi, int stencil) {
  const auto& g = psi.geometry();
  const std::ptrdiff_t r = (stencil - 1) / 2;
  MaskField band(g, 0);
  for_each_voxel(g, [&](auto i, auto j, auto k, std::size_t n) {
    bool any_in = false, any_out = false;
    for (int a = 0; a < 3; ++a)
      for (std::ptrdiff_t t = -r; t <= r; ++t) {
        Index3 v{i, j, k};
        v[a] += t;
        if (!g.contains(v)) continue;
        (psi(v) < 0.0 ? any_in : any_out) = true;
      }
    band[n] = any_in && any_out;
  });
  return band;
}

Vec3 sphere_projection(const Vec3& x, double r) { return x * (r / norm(x)); }

Vec3 torus_projection(const Vec3& x, double a, double c) {
  const double rho = std::hypot(x.x, x.y);
  const Vec3 ring{c * x.x / rho, c * x.y / rho, 0.0};
  const Vec3 d = x - ring;
  return ring + d * (a / norm(d));
}

} // namespace

TEST(Narrowband, MatchesBruteForceMorphology) {
  const GridGeometry g({13, 11, 9}, {1, 1, 1});
  for (unsigned seed : {1u, 2u, 3u}) {
    const ScalarField psi = random_field(g, seed, -0.3, 1.0);
    for (int stencil : {3, 5, 7}) {
      const MaskField band = select_narrowband(psi, stencil);
      EXPECT_EQ(band.values(), brute_band(psi, stencil).values()) << "stencil " << stencil << " seed " << seed;
    }
  }
}

TEST(Narrowband, SphereBandStraddlesSurface) {
  const GridGeometry g = phantom_geometry(0.5);
  const ScalarField psi = analytic_sdf(AnalyticSurface::sphere(5.0), g);
  const MaskField band = select_narrowband(psi, 5);
  EXPECT_GT(count(band), 0u);
  for (std::size_t n = 0; n < band.size(); ++n) {
    if (band[n]) EXPECT_LE(std::abs(psi[n]), 2 * 0.5 * std::sqrt(3.0) + 1e-9);
    if (std::abs(psi[n]) < 0.25) EXPECT_TRUE(band[n]);
  }
  EXPECT_THROW(select_narrowband(psi, 4), std::invalid_argument);
  EXPECT_THROW(select_narrowband(psi, 1), std::invalid_argument);
}

TEST(Narrowband, UniformSignGivesEmptyBand) {
  const ScalarField psi(GridGeometry({6, 6, 6}), 1.0);
  EXPECT_EQ(count(select_narrowband(psi)), 0u);
  EXPECT_THROW(solve_narrowband(psi, select_narrowband(psi)), std::invalid_argument);
}

TEST(RegularizedSign, BoundsAndLimits) {
  EXPECT_EQ(regularized_sign(0.0, 0.0, 1.0), 0.0);
  EXPECT_EQ(regularized_sign(0.0, 3.0, 1.0), 0.0);
  EXPECT_NEAR(regularized_sign(1e6, 1.0, 0.5), 1.0, 1e-9);
  EXPECT_NEAR(regularized_sign(-1e6, 1.0, 0.5), -1.0, 1e-9);
  EXPECT_NEAR(regularized_sign(0.5, 1.0, 0.5), 0.5 / std::sqrt(0.5), 1e-15);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int t = 0; t < 100; ++t) {
    const double p = u(rng), gm = std::abs(u(rng)) + 0.1;
    const double s = regularized_sign(p, gm, 0.3);
    EXPECT_LT(std::abs(s), 1.0);
    EXPECT_EQ(std::signbit(s), std::signbit(p));
  }
  EXPECT_THROW(regularized_sign(1, 1, 0), std::invalid_argument);
  EXPECT_THROW(regularized_sign(1, -1, 1), std::invalid_argument);
}

TEST(CPConfig, SpacingDefaults) {
  const CPConfig c = CPConfig{}.resolved(0.5);
  EXPECT_DOUBLE_EQ(c.step, 0.5);
  EXPECT_DOUBLE_EQ(c.delta, 0.5);
  EXPECT_DOUBLE_EQ(c.tolerance, 1e-6 * 0.125);
  EXPECT_DOUBLE_EQ(c.beta, 0.5);
  EXPECT_EQ(c.max_iters, 100);
  CPConfig explicit_tol;
  explicit_tol.tolerance = 1e-3;
  EXPECT_DOUBLE_EQ(explicit_tol.resolved(0.5).tolerance, 1e-3);
  CPConfig bad;
  bad.beta = 0.0;
  EXPECT_THROW(bad.resolved(1.0), std::invalid_argument);
  bad = {};
  bad.tolerance_scale = 0.0;
  EXPECT_THROW(bad.resolved(1.0), std::invalid_argument);
  bad = {};
  bad.max_iters = 0;
  EXPECT_THROW(bad.resolved(1.0), std::invalid_argument);
}

class ClosestPointSphere : public ::testing::Test {
protected:
  static void SetUpTestSuite() {
    const GridGeometry g = phantom_geometry(0.25);
    interp_ = new SplineInterpolant(analytic_sdf(AnalyticSurface::sphere(5.0), g), 3);
  }
  static void TearDownTestSuite() { delete interp_; }
  static SplineInterpolant* interp_;
};
SplineInterpolant* ClosestPointSphere::interp_ = nullptr;

TEST_F(ClosestPointSphere, FlowLandsOnSurface) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> radius(4.0, 6.0);
  for (int t = 0; t < 100; ++t) {
    Vec3 dir{n01(rng), n01(rng), n01(rng)};
    const Vec3 x = dir * (radius(rng) / norm(dir));
    const ClosestPointResult r = closest_point(*interp_, x);
    ASSERT_TRUE(r.converged);
    EXPECT_NEAR(norm(r.point), 5.0, 1e-3);
    EXPECT_LE(r.iterations, 100);
  }
}

TEST_F(ClosestPointSphere, CollinearMatchesRadialProjection) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> radius(4.2, 5.8);
  const CPConfig cfg = CPConfig{}.resolved(0.25);
  for (int t = 0; t < 100; ++t) {
    Vec3 dir{n01(rng), n01(rng), n01(rng)};
    const Vec3 x = dir * (radius(rng) / norm(dir));
    const ClosestPointResult r = collinear_closest_point(*interp_, x, cfg);
    ASSERT_TRUE(r.converged);
    EXPECT_LE(r.tangent_residual, cfg.tolerance);
    const Vec3 truth = sphere_projection(x, 5.0);
    EXPECT_LT(norm(r.point - truth), 1e-3);
    // Displacement parallel to the interpolated normal at the landing point.
    const Vec3 nrm = interp_->eval_gradient(r.point);
    const Vec3 q = x - r.point;
    EXPECT_LE(norm(cross(q, nrm)) / norm(nrm), 10 * cfg.tolerance + 1e-12);
  }
}

TEST(ClosestPoint, TorusCollinear) {
  const GridGeometry g = phantom_geometry(0.25);
  const SplineInterpolant interp(analytic_sdf(AnalyticSurface::torus(2.0, 3.0), g), 3);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> ang(0, 2 * std::numbers::pi), off(-0.7, 0.7);
  for (int t = 0; t < 60; ++t) {
    const double a = ang(rng), b = ang(rng), r = 2.0 + off(rng);
    const Vec3 x{(3 + r * std::cos(b)) * std::cos(a), (3 + r * std::cos(b)) * std::sin(a), r * std::sin(b)};
    const ClosestPointResult cp = collinear_closest_point(interp, x);
    ASSERT_TRUE(cp.converged);
    EXPECT_LT(norm(cp.point - torus_projection(x, 2.0, 3.0)), 2e-3);
  }
}

TEST(ClosestPoint, IterationCapReportsFailure) {
  const GridGeometry g = phantom_geometry(0.5);
  const SplineInterpolant interp(analytic_sdf(AnalyticSurface::sphere(5.0), g), 3);
  CPConfig cfg;
  cfg.max_iters = 1;
  cfg.step = 0.01;
  const ClosestPointResult r = closest_point(interp, {8, 0, 0}, cfg.resolved(0.5));
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations, 1);
}

TEST(SolveNarrowband, SphereDistancesAndSigns) {
  const GridGeometry g = phantom_geometry(0.5);
  const ScalarField truth = analytic_sdf(AnalyticSurface::sphere(5.0), g);
  const ScalarField psi = truth;
  const MaskField band = select_narrowband(psi, 5);
  const NarrowbandSolution sol = solve_narrowband(psi, band);
  EXPECT_TRUE(sol.fallback.empty());
  EXPECT_EQ(sol.solved.size(), count(band));
  std::size_t inner = 0, outer = 0;
  for (const auto& [k, v] : sol.inner_histogram) inner += v;
  for (const auto& [k, v] : sol.outer_histogram) outer += v;
  EXPECT_EQ(inner, count(band));
  EXPECT_EQ(outer, count(band));
  std::size_t prev = 0;
  for (const auto& v : sol.solved) {
    EXPECT_GE(v.index, prev);
    prev = v.index;
    EXPECT_TRUE(band[v.index]);
    EXPECT_EQ(std::signbit(v.distance), std::signbit(psi[v.index])) << v.index;
    EXPECT_NEAR(v.distance, truth[v.index], 5e-3);
  }
  const ScalarField dense = sol.to_field(99.0);
  for (std::size_t n = 0; n < dense.size(); ++n)
    if (!band[n]) EXPECT_EQ(dense[n], 99.0);
}

TEST(SolveNarrowband, ExactZeroIsItsOwnClosestPoint) {
  // Plane x = 0 sampled on integer nodes: the x = 0 column is exactly zero.
  const GridGeometry g({9, 6, 6}, {1, 1, 1}, {-4, 0, 0});
  ScalarField psi(g);
  for_each_voxel(g, [&](auto i, auto, auto, std::size_t n) { psi[n] = g.world(i, 0, 0).x; });
  const NarrowbandSolution sol = solve_narrowband(psi, select_narrowband(psi, 3));
  ASSERT_TRUE(sol.fallback.empty());
  for (const auto& v : sol.solved) {
    EXPECT_NEAR(v.distance, psi[v.index], 1e-9);
    if (psi[v.index] == 0.0) {
      EXPECT_EQ(v.distance, 0.0);
      EXPECT_EQ(v.iterations, 0);
    }
  }
}
