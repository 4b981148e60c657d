#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "hosdf/bspline.hpp"
#include "hosdf/marching_cubes.hpp"
#include "hosdf/mesh_io.hpp"
#include "hosdf/phantom.hpp"
#include "test_support.hpp"

using namespace hosdf;
using hosdf::testing::TempDir;
using std::numbers::pi;

namespace {

/// Random values with a positive one-voxel shell, so every level set is closed.
ScalarField padded_random(const GridGeometry& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ScalarField f(g);
  for_each_voxel(g, [&](auto i, auto j, auto k, std::size_t n) {
    const bool shell = i == 0 || j == 0 || k == 0 || i == g.dims[0] - 1 || j == g.dims[1] - 1 || k == g.dims[2] - 1;
    f[n] = shell ? 1.0 : u(rng);
  });
  return f;
}

/// Every directed edge appears once and its reverse once.
bool consistently_oriented(const TriMesh& m) {
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> directed;
  for (const auto& t : m.triangles)
    for (int e = 0; e < 3; ++e) ++directed[{t[e], t[(e + 1) % 3]}];
  for (const auto& [edge, n] : directed) {
    if (n != 1) return false;
    auto it = directed.find({edge.second, edge.first});
    if (it == directed.end() || it->second != 1) return false;
  }
  return true;
}

} // namespace

TEST(CaseTable, EverySingleCubeConfiguration) {
  const GridGeometry g({2, 2, 2});
  for (int config = 0; config < 256; ++config) {
    ScalarField f(g);
    for (int c = 0; c < 8; ++c) {
      const auto& o = detail::kCorner[c];
      f(o[0], o[1], o[2]) = (config >> c & 1) ? -1.0 : 1.0;
    }
    const TriMesh m = marching_cubes(f, 0.0);
    if (config == 0 || config == 255) {
      EXPECT_TRUE(m.triangles.empty());
      continue;
    }
    EXPECT_FALSE(m.triangles.empty()) << config;
    // All vertices are edge midpoints; every sign-changing edge is used.
    int crossing_edges = 0;
    for (const auto& e : detail::kEdge) crossing_edges += ((config >> e[0]) & 1) != ((config >> e[1]) & 1);
    EXPECT_EQ(static_cast<int>(m.vertices.size()), crossing_edges) << config;
    for (const Vec3& v : m.vertices) {
      int halves = 0;
      for (int a = 0; a < 3; ++a) halves += v[a] == 0.5;
      EXPECT_EQ(halves, 1) << config;
    }
    // No triangle lies flat inside a cube face.
    for (const auto& t : m.triangles)
      for (int ax = 0; ax < 3; ++ax)
        for (double side : {0.0, 1.0})
          EXPECT_FALSE(m.vertices[t[0]][ax] == side && m.vertices[t[1]][ax] == side && m.vertices[t[2]][ax] == side)
              << config;
    // Open edges of the patch lie on cube faces.
    for (const auto& [key, uses] : edge_use(m)) {
      if (uses == 2) continue;
      EXPECT_EQ(uses, 1) << config;
      const Vec3 a = m.vertices[key >> 32], b = m.vertices[key & 0xffffffffu];
      bool shared_face = false;
      for (int ax = 0; ax < 3; ++ax)
        for (double side : {0.0, 1.0}) shared_face |= a[ax] == side && b[ax] == side;
      EXPECT_TRUE(shared_face) << config;
    }
  }
}

TEST(MarchingCubes, RandomFieldsAreWatertight) {
  const GridGeometry g({10, 9, 8});
  for (unsigned seed = 1; seed <= 30; ++seed) {
    const TriMesh m = marching_cubes(padded_random(g, seed), 0.0);
    ASSERT_FALSE(m.triangles.empty());
    EXPECT_TRUE(is_closed_manifold(m)) << seed;
    EXPECT_TRUE(consistently_oriented(m)) << seed;
    EXPECT_EQ(euler_characteristic(m) % 2, 0) << seed;
  }
}

TEST(MarchingCubes, SphereGeometryAndTopology) {
  const GridGeometry g = phantom_geometry(0.25);
  const TriMesh m = marching_cubes(analytic_sdf(AnalyticSurface::sphere(5.0), g), 0.0);
  EXPECT_TRUE(is_closed_manifold(m));
  EXPECT_EQ(euler_characteristic(m), 2);
  EXPECT_EQ(connected_components(m), 1u);
  EXPECT_NEAR(mesh_area(m), 100 * pi, 0.01 * 100 * pi);
  EXPECT_NEAR(mesh_volume(m), 500 * pi / 3, 0.01 * 500 * pi / 3);
  for (const Vec3& v : m.vertices) EXPECT_NEAR(norm(v), 5.0, 0.01);
  // Normals point towards increasing values, here outwards. Grid nodes with
  // an exact zero produce collapsed triangles, which have no direction.
  for (const auto& t : m.triangles) {
    const Vec3 a = m.vertices[t[0]], b = m.vertices[t[1]], c = m.vertices[t[2]];
    const Vec3 n = cross(b - a, c - a);
    if (norm(n) < 1e-12) continue;
    EXPECT_GT(dot(n, a + b + c), 0.0);
  }
}

TEST(MarchingCubes, TorusAndTwoSpheres) {
  const GridGeometry g = phantom_geometry(0.5);
  const TriMesh torus = marching_cubes(analytic_sdf(AnalyticSurface::torus(2.0, 3.0), g), 0.0);
  EXPECT_EQ(euler_characteristic(torus), 0);
  EXPECT_EQ(connected_components(torus), 1u);

  ScalarField two(g);
  const AnalyticSurface s1 = AnalyticSurface::sphere(3.0, {-5, 0, 0}), s2 = AnalyticSurface::sphere(3.0, {5, 0, 0});
  for_each_voxel(g, [&](auto i, auto j, auto k, std::size_t n) {
    const Vec3 p = g.world(i, j, k);
    two[n] = std::min(s1.signed_distance(p), s2.signed_distance(p));
  });
  const TriMesh m = marching_cubes(two, 0.0);
  EXPECT_EQ(connected_components(m), 2u);
  EXPECT_EQ(euler_characteristic(m), 4);
}

TEST(MarchingCubes, LinearFieldVerticesOnPlane) {
  const GridGeometry g({6, 5, 5}, {0.5, 0.5, 0.5});
  ScalarField f(g);
  for_each_voxel(g, [&](auto i, auto j, auto k, std::size_t n) {
    const Vec3 p = g.world(i, j, k);
    f[n] = p.x + 0.25 * p.y;
  });
  const TriMesh m = marching_cubes(f, 1.1);
  ASSERT_FALSE(m.vertices.empty());
  for (const Vec3& v : m.vertices) EXPECT_NEAR(v.x + 0.25 * v.y, 1.1, 1e-12);
  EXPECT_FALSE(is_closed_manifold(m));
  EXPECT_TRUE(marching_cubes(f, 100.0).triangles.empty());
}

TEST(Ply, RoundTripBothFormats) {
  const TempDir dir;
  const GridGeometry g = phantom_geometry(1.0);
  const ScalarField phi = analytic_sdf(AnalyticSurface::sphere(4.0), g);
  TriMesh m = marching_cubes(phi, 0.0);
  const SplineInterpolant interp(phi, 3);
  EXPECT_EQ(sample_vertex_channel(m, interp, "H"), 0u);
  EXPECT_EQ(sample_vertex_channel(m, interp, "K"), 0u);
  for (std::size_t v = 0; v < m.vertices.size(); ++v) EXPECT_EQ(m.channels[0].second[v], interp.eval(m.vertices[v]));
  for (PlyFormat fmt : {PlyFormat::Ascii, PlyFormat::BinaryLittleEndian}) {
    const auto path = dir / (fmt == PlyFormat::Ascii ? "a.ply" : "b.ply");
    write_ply(m, path, fmt, {"provenance {\"tool\":\"x\"}"});
    const TriMesh r = read_ply(path);
    ASSERT_EQ(r.vertices.size(), m.vertices.size());
    EXPECT_EQ(r.vertices, m.vertices);
    EXPECT_EQ(r.triangles, m.triangles);
    ASSERT_EQ(r.channels.size(), 2u);
    EXPECT_EQ(r.channels[0].first, "H");
    EXPECT_EQ(r.channels[1].first, "K");
    EXPECT_EQ(r.channels[1].second, m.channels[1].second);
  }
  std::ifstream in(dir / "a.ply");
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  std::getline(in, line);
  EXPECT_EQ(line, "comment provenance {\"tool\":\"x\"}");
}

TEST(Ply, ChannelReplacementAndMirroredVertices) {
  const GridGeometry g({5, 5, 5});
  const SplineInterpolant interp(ScalarField(g, 2.0), 3);
  TriMesh m;
  m.vertices = {{1, 1, 1}, {-0.5, 1, 1}, {2, 2, 4.5}};
  m.triangles = {{0, 1, 2}};
  EXPECT_EQ(sample_vertex_channel(m, interp, "H"), 2u);
  m.channels[0].second[0] = 7;
  sample_vertex_channel(m, interp, "H");
  ASSERT_EQ(m.channels.size(), 1u);
  EXPECT_NEAR(m.channels[0].second[0], 2.0, 1e-12);
}

TEST(Ply, Errors) {
  const TempDir dir;
  EXPECT_THROW(read_ply(dir / "missing.ply"), IoError);
  {
    std::ofstream(dir / "bad.ply") << "not a ply\n";
  }
  EXPECT_THROW(read_ply(dir / "bad.ply"), IoError);
  {
    std::ofstream(dir / "short.ply") << "ply\nformat ascii 1.0\nelement vertex 3\nproperty double x\n"
                                        "property double y\nproperty double z\nelement face 0\n"
                                        "property list uchar int vertex_indices\nend_header\n0 0 0\n1 1 1\n";
  }
  EXPECT_THROW(read_ply(dir / "short.ply"), IoError);
  {
    std::ofstream(dir / "index.ply") << "ply\nformat ascii 1.0\nelement vertex 1\nproperty double x\n"
                                        "property double y\nproperty double z\nelement face 1\n"
                                        "property list uchar int vertex_indices\nend_header\n0 0 0\n3 0 0 5\n";
  }
  EXPECT_THROW(read_ply(dir / "index.ply"), IoError);
  TriMesh m;
  m.vertices = {{0, 0, 0}};
  m.channels.emplace_back("H", std::vector<double>{1, 2});
  EXPECT_THROW(write_ply(m, dir / "x.ply"), std::invalid_argument);
  EXPECT_THROW(write_ply(TriMesh{}, dir / "no_such_dir" / "x.ply"), IoError);
}
