#pragma once

// Marching cubes with linear edge interpolation.
//
// The 256-entry case table is generated once from the face-cut rule rather
// than typed in: on each cube face the crossing points are joined pairwise,
// and on ambiguous faces (diagonal corners on the same side) the segments
// cut off the inside corners. Every face is resolved from its own four
// corners only, so neighbouring cubes always agree and closed level sets
// come out watertight. Each resulting polygon is fanned into triangles
// oriented so their normals point towards increasing field values. The fan
// apex is chosen so that no diagonal runs inside a cube face, where the
// neighbouring cube would duplicate it.

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hosdf/grid.hpp"

namespace hosdf {

struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;
  std::vector<std::pair<std::string, std::vector<double>>> channels; ///< per-vertex scalars

  const std::vector<double>* channel(const std::string& name) const {
    for (const auto& [n, v] : channels)
      if (n == name) return &v;
    return nullptr;
  }
};

namespace detail {

// Usual corner numbering: 0 (0,0,0) 1 (1,0,0) 2 (1,1,0) 3 (0,1,0), 4..7 the
// same at z = 1.
inline constexpr std::array<std::array<int, 3>, 8> kCorner{{
    {0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}}};
inline constexpr std::array<std::array<int, 2>, 12> kEdge{{
    {0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6}, {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7}}};
// Faces as cyclic corner lists.
inline constexpr std::array<std::array<int, 4>, 6> kFace{{
    {0, 1, 2, 3}, {4, 5, 6, 7}, {0, 1, 5, 4}, {3, 2, 6, 7}, {0, 3, 7, 4}, {1, 2, 6, 5}}};

inline int edge_between(int a, int b) {
  for (int e = 0; e < 12; ++e)
    if ((kEdge[e][0] == a && kEdge[e][1] == b) || (kEdge[e][0] == b && kEdge[e][1] == a)) return e;
  return -1;
}

/// Closed loops of cut edges, oriented inside -> outside, fan apex first.
using CaseTable = std::array<std::vector<std::vector<int>>, 256>;

inline bool edges_share_face(int a, int b) {
  for (const auto& f : kFace) {
    bool has_a = false, has_b = false;
    for (int s = 0; s < 4; ++s) {
      const int e = edge_between(f[s], f[(s + 1) % 4]);
      has_a |= e == a;
      has_b |= e == b;
    }
    if (has_a && has_b) return true;
  }
  return false;
}

inline CaseTable build_case_table() {
  CaseTable table;
  for (int config = 0; config < 256; ++config) {
    auto inside = [&](int c) { return (config >> c) & 1; };
    std::array<std::vector<int>, 12> adj;
    for (const auto& f : kFace) {
      std::array<int, 4> e;
      for (int s = 0; s < 4; ++s) e[s] = edge_between(f[s], f[(s + 1) % 4]);
      std::vector<int> crossing;
      for (int s = 0; s < 4; ++s)
        if (inside(f[s]) != inside(f[(s + 1) % 4])) crossing.push_back(s);
      auto link = [&](int a, int b) {
        adj[e[a]].push_back(e[b]);
        adj[e[b]].push_back(e[a]);
      };
      if (crossing.size() == 2) {
        link(crossing[0], crossing[1]);
      } else if (crossing.size() == 4) {
        // Edge s joins corner s to s+1; cut off the inside corners.
        if (inside(f[0])) {
          link(3, 0);
          link(1, 2);
        } else {
          link(0, 1);
          link(2, 3);
        }
      }
    }
    std::array<bool, 12> used{};
    for (int start = 0; start < 12; ++start) {
      if (used[start] || adj[start].empty()) continue;
      std::vector<int> loop{start};
      used[start] = true;
      int prev = -1, cur = start;
      for (;;) {
        const int next = adj[cur][0] != prev ? adj[cur][0] : adj[cur][1];
        if (next == start) break;
        loop.push_back(next);
        used[next] = true;
        prev = cur;
        cur = next;
      }
      // Orient: normal (Newell, edge midpoints) along inside -> outside.
      auto mid = [&](int e) {
        const auto& a = kCorner[kEdge[e][0]];
        const auto& b = kCorner[kEdge[e][1]];
        return Vec3{0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.5 * (a[2] + b[2])};
      };
      Vec3 normal, outward;
      for (std::size_t s = 0; s < loop.size(); ++s) {
        const Vec3 p = mid(loop[s]), q = mid(loop[(s + 1) % loop.size()]);
        normal += cross(p, q);
        const int c0 = kEdge[loop[s]][0], c1 = kEdge[loop[s]][1];
        const int in = inside(c0) ? c0 : c1, out = inside(c0) ? c1 : c0;
        outward += Vec3{double(kCorner[out][0] - kCorner[in][0]), double(kCorner[out][1] - kCorner[in][1]),
                        double(kCorner[out][2] - kCorner[in][2])};
      }
      if (dot(normal, outward) < 0.0) std::reverse(loop.begin(), loop.end());
      const std::size_t n = loop.size();
      bool placed = false;
      for (std::size_t apex = 0; apex < n && !placed; ++apex) {
        bool clean = true;
        for (std::size_t s = 2; s + 1 < n; ++s) clean &= !edges_share_face(loop[apex], loop[(apex + s) % n]);
        if (clean) {
          std::rotate(loop.begin(), loop.begin() + static_cast<std::ptrdiff_t>(apex), loop.end());
          placed = true;
        }
      }
      if (!placed) throw std::logic_error("marching cubes: polygon without a face-free fan apex");
      table[config].push_back(std::move(loop));
    }
  }
  return table;
}

inline const CaseTable& case_table() {
  static const CaseTable table = build_case_table();
  return table;
}

} // namespace detail

/// Triangulates {field = level}. Corners with value < level are inside.
/// Vertices on the same grid edge are shared.
inline TriMesh marching_cubes(const ScalarField& field, double level) {
  const auto& g = field.geometry();
  const auto& table = detail::case_table();
  TriMesh mesh;
  std::unordered_map<std::uint64_t, std::uint32_t> edge_vertex;
  std::vector<std::uint32_t> ids;

  auto vertex_on = [&](std::ptrdiff_t i, std::ptrdiff_t j, std::ptrdiff_t k, int edge) -> std::uint32_t {
    const auto& ca = detail::kCorner[detail::kEdge[edge][0]];
    const auto& cb = detail::kCorner[detail::kEdge[edge][1]];
    Index3 a{i + ca[0], j + ca[1], k + ca[2]}, b{i + cb[0], j + cb[1], k + cb[2]};
    if (g.linear(b) < g.linear(a)) std::swap(a, b);
    int axis = 0;
    while (a[axis] == b[axis]) ++axis;
    const std::uint64_t key = static_cast<std::uint64_t>(g.linear(a)) * 3u + static_cast<std::uint64_t>(axis);
    if (auto it = edge_vertex.find(key); it != edge_vertex.end()) return it->second;
    const double va = field(a), vb = field(b);
    const double t = (level - va) / (vb - va);
    const Vec3 pa = g.world(a), pb = g.world(b);
    mesh.vertices.push_back(pa + (pb - pa) * t);
    const auto id = static_cast<std::uint32_t>(mesh.vertices.size() - 1);
    edge_vertex.emplace(key, id);
    return id;
  };

  for (std::ptrdiff_t k = 0; k + 1 < g.dims[2]; ++k)
    for (std::ptrdiff_t j = 0; j + 1 < g.dims[1]; ++j)
      for (std::ptrdiff_t i = 0; i + 1 < g.dims[0]; ++i) {
        int config = 0;
        for (int c = 0; c < 8; ++c) {
          const auto& o = detail::kCorner[c];
          if (field(i + o[0], j + o[1], k + o[2]) < level) config |= 1 << c;
        }
        for (const auto& loop : table[config]) {
          ids.resize(loop.size());
          for (std::size_t s = 0; s < loop.size(); ++s) ids[s] = vertex_on(i, j, k, loop[s]);
          for (std::size_t s = 1; s + 1 < loop.size(); ++s) mesh.triangles.push_back({ids[0], ids[s], ids[s + 1]});
        }
      }
  return mesh;
}

/// Surface area of the mesh.
inline double mesh_area(const TriMesh& m) {
  double a = 0.0;
  for (const auto& t : m.triangles)
    a += 0.5 * norm(cross(m.vertices[t[1]] - m.vertices[t[0]], m.vertices[t[2]] - m.vertices[t[0]]));
  return a;
}

/// Signed enclosed volume (divergence theorem); positive for outward normals.
inline double mesh_volume(const TriMesh& m) {
  double v = 0.0;
  for (const auto& t : m.triangles) v += dot(m.vertices[t[0]], cross(m.vertices[t[1]], m.vertices[t[2]])) / 6.0;
  return v;
}

namespace detail {
inline std::uint64_t edge_key(std::uint32_t a, std::uint32_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | b;
}
} // namespace detail

/// Number of triangles using each undirected edge.
inline std::unordered_map<std::uint64_t, int> edge_use(const TriMesh& m) {
  std::unordered_map<std::uint64_t, int> use;
  for (const auto& t : m.triangles)
    for (int s = 0; s < 3; ++s) ++use[detail::edge_key(t[s], t[(s + 1) % 3])];
  return use;
}

/// Every edge shared by exactly two triangles.
inline bool is_closed_manifold(const TriMesh& m) {
  for (const auto& [k, n] : edge_use(m))
    if (n != 2) return false;
  return !m.triangles.empty();
}

/// V - E + F over the vertices referenced by triangles.
inline long euler_characteristic(const TriMesh& m) {
  std::vector<bool> referenced(m.vertices.size(), false);
  for (const auto& t : m.triangles)
    for (auto v : t) referenced[v] = true;
  const long v = static_cast<long>(std::count(referenced.begin(), referenced.end(), true));
  const long e = static_cast<long>(edge_use(m).size());
  return v - e + static_cast<long>(m.triangles.size());
}

/// Connected components of the triangle adjacency (through shared vertices).
inline std::size_t connected_components(const TriMesh& m) {
  std::vector<std::uint32_t> parent(m.vertices.size());
  std::iota(parent.begin(), parent.end(), 0u);
  auto find = [&](std::uint32_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& t : m.triangles) {
    parent[find(t[1])] = find(t[0]);
    parent[find(t[2])] = find(t[0]);
  }
  std::vector<bool> referenced(m.vertices.size(), false), root(m.vertices.size(), false);
  for (const auto& t : m.triangles)
    for (auto v : t) referenced[v] = true;
  std::size_t n = 0;
  for (std::uint32_t v = 0; v < m.vertices.size(); ++v) {
    if (!referenced[v]) continue;
    const auto r = find(v);
    if (!root[r]) {
      root[r] = true;
      ++n;
    }
  }
  return n;
}

} // namespace hosdf
