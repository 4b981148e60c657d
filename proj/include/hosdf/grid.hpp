#pragma once

// Rectilinear 3-D grids. Values are stored x-fastest: the linear index of
// voxel (i, j, k) is i + nx * (j + ny * k).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hosdf {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  constexpr double operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
  constexpr double& operator[](int axis) { return axis == 0 ? x : (axis == 1 ? y : z); }

  constexpr Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  constexpr Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  constexpr Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }

  friend constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
  friend constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
  friend constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
  friend constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
  friend constexpr Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

using Index3 = std::array<std::ptrdiff_t, 3>;

/// Reflect-without-repeat: ..., 2, 1, [0, 1, ..., n-1], n-2, n-3, ...
/// Works for arbitrarily distant indices (period 2(n-1)).
constexpr std::ptrdiff_t mirror_index(std::ptrdiff_t i, std::ptrdiff_t n) {
  if (n == 1) return 0;
  const std::ptrdiff_t period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

struct GridGeometry {
  std::array<std::ptrdiff_t, 3> dims{1, 1, 1};
  std::array<double, 3> spacing{1.0, 1.0, 1.0};
  std::array<double, 3> origin{0.0, 0.0, 0.0};

  GridGeometry() = default;
  GridGeometry(std::array<std::ptrdiff_t, 3> d, std::array<double, 3> s = {1, 1, 1}, std::array<double, 3> o = {0, 0, 0})
      : dims(d), spacing(s), origin(o) {
    validate();
  }

  void validate() const {
    for (int a = 0; a < 3; ++a) {
      if (dims[a] < 1) throw std::invalid_argument("grid dimension must be >= 1");
      if (!(spacing[a] > 0.0) || !std::isfinite(spacing[a]))
        throw std::invalid_argument("grid spacing must be positive and finite");
      if (!std::isfinite(origin[a])) throw std::invalid_argument("grid origin must be finite");
    }
  }

  std::size_t size() const { return static_cast<std::size_t>(dims[0] * dims[1] * dims[2]); }

  std::size_t linear(std::ptrdiff_t i, std::ptrdiff_t j, std::ptrdiff_t k) const {
    return static_cast<std::size_t>(i + dims[0] * (j + dims[1] * k));
  }
  std::size_t linear(const Index3& v) const { return linear(v[0], v[1], v[2]); }

  Index3 unravel(std::size_t n) const {
    const auto idx = static_cast<std::ptrdiff_t>(n);
    return {idx % dims[0], (idx / dims[0]) % dims[1], idx / (dims[0] * dims[1])};
  }

  bool contains(const Index3& v) const {
    return v[0] >= 0 && v[1] >= 0 && v[2] >= 0 && v[0] < dims[0] && v[1] < dims[1] && v[2] < dims[2];
  }

  Vec3 world(std::ptrdiff_t i, std::ptrdiff_t j, std::ptrdiff_t k) const {
    return {origin[0] + i * spacing[0], origin[1] + j * spacing[1], origin[2] + k * spacing[2]};
  }
  Vec3 world(const Index3& v) const { return world(v[0], v[1], v[2]); }

  /// Continuous voxel coordinates of a world point.
  Vec3 continuous_index(const Vec3& p) const {
    return {(p.x - origin[0]) / spacing[0], (p.y - origin[1]) / spacing[1], (p.z - origin[2]) / spacing[2]};
  }

  double min_spacing() const { return std::min({spacing[0], spacing[1], spacing[2]}); }
  double voxel_volume() const { return spacing[0] * spacing[1] * spacing[2]; }

  /// Length of the box spanned by the voxel centres.
  double diagonal() const {
    double s = 0.0;
    for (int a = 0; a < 3; ++a) {
      const double e = static_cast<double>(dims[a] - 1) * spacing[a];
      s += e * e;
    }
    return std::sqrt(s);
  }

  friend bool operator==(const GridGeometry&, const GridGeometry&) = default;
};

/// Dense value-per-voxel array on a GridGeometry.
template <typename T>
class Field {
public:
  using value_type = T;

  Field() = default;
  explicit Field(GridGeometry g, T fill = T{}) : geometry_(std::move(g)), values_(geometry_.size(), fill) {
    geometry_.validate();
  }
  Field(GridGeometry g, std::vector<T> values) : geometry_(std::move(g)), values_(std::move(values)) {
    geometry_.validate();
    if (values_.size() != geometry_.size()) throw std::invalid_argument("field value count does not match grid size");
  }

  const GridGeometry& geometry() const { return geometry_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  T& operator[](std::size_t n) { return values_[n]; }
  const T& operator[](std::size_t n) const { return values_[n]; }

  T& operator()(std::ptrdiff_t i, std::ptrdiff_t j, std::ptrdiff_t k) { return values_[geometry_.linear(i, j, k)]; }
  const T& operator()(std::ptrdiff_t i, std::ptrdiff_t j, std::ptrdiff_t k) const {
    return values_[geometry_.linear(i, j, k)];
  }
  T& operator()(const Index3& v) { return values_[geometry_.linear(v)]; }
  const T& operator()(const Index3& v) const { return values_[geometry_.linear(v)]; }

  /// Value with mirror boundary handling on every axis.
  const T& mirrored(std::ptrdiff_t i, std::ptrdiff_t j, std::ptrdiff_t k) const {
    const auto& d = geometry_.dims;
    return values_[geometry_.linear(mirror_index(i, d[0]), mirror_index(j, d[1]), mirror_index(k, d[2]))];
  }

  T* data() { return values_.data(); }
  const T* data() const { return values_.data(); }

  std::vector<T>& values() { return values_; }
  const std::vector<T>& values() const { return values_; }

  auto begin() { return values_.begin(); }
  auto end() { return values_.end(); }
  auto begin() const { return values_.begin(); }
  auto end() const { return values_.end(); }

private:
  GridGeometry geometry_;
  std::vector<T> values_;
};

using ScalarField = Field<double>;
/// Boolean voxel set; stored as bytes so it can be addressed like any field.
using MaskField = Field<std::uint8_t>;

inline std::size_t count(const MaskField& m) {
  std::size_t n = 0;
  for (auto b : m) n += b != 0;
  return n;
}

template <typename A, typename B>
void require_same_geometry(const Field<A>& a, const Field<B>& b, const char* what) {
  if (!(a.geometry() == b.geometry())) throw std::invalid_argument(std::string(what) + ": fields do not share a geometry");
}

/// Calls f(i, j, k, linear) for every voxel in x-fastest order.
template <typename F>
void for_each_voxel(const GridGeometry& g, F&& f) {
  std::size_t n = 0;
  for (std::ptrdiff_t k = 0; k < g.dims[2]; ++k)
    for (std::ptrdiff_t j = 0; j < g.dims[1]; ++j)
      for (std::ptrdiff_t i = 0; i < g.dims[0]; ++i, ++n) f(i, j, k, n);
}

} // namespace hosdf
