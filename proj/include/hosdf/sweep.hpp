#pragma once

// Fast sweeping extension of a frozen narrowband to the whole grid.
//
// First order: Godunov upwind update, Gauss-Seidel over the eight axis
// orderings until the largest change in a cycle drops below the tolerance.
// High order: continue the same cycles with neighbour values replaced by
// third-order WENO extrapolations u -/+ h (u_x)^{-/+} (Zhang, Zhao & Qian),
// starting from the converged first-order field.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "hosdf/error.hpp"
#include "hosdf/grid.hpp"
#include "hosdf/narrowband.hpp"

namespace hosdf {

enum class SweepOrder { First, High };

struct SweepConfig {
  SweepOrder order = SweepOrder::High;
  double tolerance = 1e-10; ///< max per-cycle update, distance units
  int max_sweep_cycles = 100; ///< per phase
  double weno_epsilon = 1e-6;
};

struct SweepResult {
  ScalarField distance;   ///< unsigned
  int first_order_cycles = 0;
  int high_order_cycles = 0;
  bool converged = false;
  std::vector<double> trace; ///< max update of every cycle, both phases in order

  int cycles() const { return first_order_cycles + high_order_cycles; }
};

namespace detail {

/// Smallest t with sum_i ((t - m_i)^+ / h_i)^2 = 1 for upwind minima m.
inline double godunov_update(std::array<double, 3> m, std::array<double, 3> h) {
  // Three-element sorting network, spacings travel with their values.
  auto order = [&](int x, int y) {
    if (m[y] < m[x]) {
      std::swap(m[x], m[y]);
      std::swap(h[x], h[y]);
    }
  };
  order(0, 1);
  order(1, 2);
  order(0, 1);
  double A = 0.0, B = 0.0, C = 0.0, t = 0.0;
  for (int used = 0; used < 3; ++used) {
    const double mv = m[used];
    if (used > 0 && t <= mv) break;
    const double w = 1.0 / (h[used] * h[used]);
    A += w;
    B += w * mv;
    C += w * mv * mv;
    const double disc = B * B - A * (C - 1.0);
    t = (B + std::sqrt(std::max(disc, 0.0))) / A;
  }
  return t;
}

/// Third-order WENO backward difference (u_x)^- times 2h.
inline double weno_minus_2h(double um2, double um1, double u0, double up1, double eps) {
  const double a = u0 - 2.0 * um1 + um2;
  const double b = up1 - 2.0 * u0 + um1;
  const double r = (eps + a * a) / (eps + b * b);
  const double w = 1.0 / (1.0 + 2.0 * r * r);
  return (1.0 - w) * (up1 - um1) + w * (3.0 * u0 - 4.0 * um1 + um2);
}

/// Third-order WENO forward difference (u_x)^+ times 2h.
inline double weno_plus_2h(double um1, double u0, double up1, double up2, double eps) {
  const double a = u0 - 2.0 * up1 + up2;
  const double b = up1 - 2.0 * u0 + um1;
  const double r = (eps + a * a) / (eps + b * b);
  const double w = 1.0 / (1.0 + 2.0 * r * r);
  return (1.0 - w) * (up1 - um1) + w * (-3.0 * u0 + 4.0 * up1 - up2);
}

inline double weno_minus(double um2, double um1, double u0, double up1, double h, double eps) {
  return weno_minus_2h(um2, um1, u0, up1, eps) / (2.0 * h);
}

inline double weno_plus(double um1, double u0, double up1, double up2, double h, double eps) {
  return weno_plus_2h(um1, u0, up1, up2, eps) / (2.0 * h);
}

class Sweeper {
public:
  Sweeper(ScalarField& u, const MaskField& frozen, const SweepConfig& cfg)
      : u_(u), frozen_(frozen), cfg_(cfg), g_(u.geometry()) {
    for (int a = 0; a < 3; ++a) stride_[a] = a == 0 ? 1 : (a == 1 ? g_.dims[0] : g_.dims[0] * g_.dims[1]);
    active_.assign(g_.size(), 1);
    lock_tolerance_ = 0.01 * cfg.tolerance;
  }

  /// Marks every voxel for the next visit (call when switching schemes).
  void activate_all() { std::fill(active_.begin(), active_.end(), std::uint8_t{1}); }

  /// One cycle of eight sweeps; returns the largest change. A voxel is only
  /// recomputed if it or a neighbour within two steps along an axis moved by
  /// more than a hundredth of the tolerance since its last visit.
  double cycle(bool high_order) {
    double max_change = 0.0;
    for (int dir = 0; dir < 8; ++dir) {
      const int sx = (dir & 1) ? -1 : 1, sy = (dir & 2) ? -1 : 1, sz = (dir & 4) ? -1 : 1;
      for (std::ptrdiff_t kk = 0; kk < g_.dims[2]; ++kk) {
        const std::ptrdiff_t k = sz > 0 ? kk : g_.dims[2] - 1 - kk;
        for (std::ptrdiff_t jj = 0; jj < g_.dims[1]; ++jj) {
          const std::ptrdiff_t j = sy > 0 ? jj : g_.dims[1] - 1 - jj;
          for (std::ptrdiff_t ii = 0; ii < g_.dims[0]; ++ii) {
            const std::ptrdiff_t i = sx > 0 ? ii : g_.dims[0] - 1 - ii;
            const std::size_t n = g_.linear(i, j, k);
            if (frozen_[n] || !active_[n]) continue;
            const double old = u_[n];
            const double updated = high_order ? high_update({i, j, k}, n) : first_update({i, j, k}, n);
            active_[n] = 0;
            if (updated != old) {
              u_[n] = updated;
              const double change = std::abs(updated - old);
              max_change = std::max(max_change, change);
              if (change > lock_tolerance_) activate_stencil({i, j, k}, n);
            }
          }
        }
      }
    }
    return max_change;
  }

private:
  void activate_stencil(const Index3& v, std::size_t n) {
    active_[n] = 1;
    for (int a = 0; a < 3; ++a) {
      const std::ptrdiff_t s = stride_[a];
      for (std::ptrdiff_t off = 1; off <= 2; ++off) {
        if (v[a] - off >= 0) active_[n - static_cast<std::size_t>(off * s)] = 1;
        if (v[a] + off < g_.dims[a]) active_[n + static_cast<std::size_t>(off * s)] = 1;
      }
    }
  }

  /// Smallest in-grid neighbour value along each axis.
  std::array<double, 3> neighbour_minima(const Index3& v, std::size_t n) const {
    std::array<double, 3> m;
    for (int a = 0; a < 3; ++a) {
      double best = std::numeric_limits<double>::infinity();
      if (v[a] > 0) best = std::min(best, u_[n - static_cast<std::size_t>(stride_[a])]);
      if (v[a] < g_.dims[a] - 1) best = std::min(best, u_[n + static_cast<std::size_t>(stride_[a])]);
      m[a] = best;
    }
    return m;
  }

  double first_update(const Index3& v, std::size_t n) const {
    const std::array<double, 3> m = neighbour_minima(v, n);
    return std::min(u_[n], godunov_update(m, g_.spacing));
  }

  double high_update(const Index3& v, std::size_t n) const {
    const double* u = u_.data();
    const double u0 = u[n];
    const double eps = cfg_.weno_epsilon;
    std::array<double, 3> m;
    double floor_value = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 3; ++a) {
      const std::ptrdiff_t s = stride_[a];
      const std::ptrdiff_t i = v[a], len = g_.dims[a];
      const double* c = u + n;
      double left = std::numeric_limits<double>::infinity();
      double right = std::numeric_limits<double>::infinity();
      if (i >= 1) floor_value = std::min(floor_value, c[-s]);
      if (i + 1 < len) floor_value = std::min(floor_value, c[s]);
      if (i >= 2 && i + 1 < len) left = u0 - 0.5 * weno_minus_2h(c[-2 * s], c[-s], u0, c[s], eps);
      else if (i >= 1) left = c[-s];
      if (i >= 1 && i + 2 < len) right = u0 + 0.5 * weno_plus_2h(c[-s], u0, c[s], c[2 * s], eps);
      else if (i + 1 < len) right = c[s];
      m[a] = std::min(left, right);
    }
    return std::max(godunov_update(m, g_.spacing), floor_value);
  }

  ScalarField& u_;
  const MaskField& frozen_;
  const SweepConfig& cfg_;
  const GridGeometry& g_;
  std::array<std::ptrdiff_t, 3> stride_{};
  std::vector<std::uint8_t> active_;
  double lock_tolerance_ = 0.0;
};

} // namespace detail

/// Extends frozen unsigned values to every other voxel. `seed` holds values
/// on `frozen` voxels; everything else is ignored and recomputed.
inline SweepResult sweep_unsigned(const ScalarField& seed, const MaskField& frozen, const SweepConfig& cfg = {}) {
  require_same_geometry(seed, frozen, "sweep_unsigned");
  if (!(cfg.tolerance > 0.0)) throw std::invalid_argument("sweep tolerance must be positive");
  if (cfg.max_sweep_cycles < 1) throw std::invalid_argument("max_sweep_cycles must be >= 1");
  const auto& g = seed.geometry();
  const double sentinel = 10.0 * std::max(g.diagonal(), g.min_spacing());

  SweepResult res;
  res.distance = ScalarField(g, sentinel);
  std::size_t seeds = 0;
  for (std::size_t n = 0; n < seed.size(); ++n) {
    if (!frozen[n]) continue;
    res.distance[n] = std::abs(seed[n]);
    ++seeds;
  }
  if (seeds == 0) throw NumericalError("sweep_unsigned: no seed voxels");

  detail::Sweeper sweeper(res.distance, frozen, cfg);
  bool converged = false;
  while (res.first_order_cycles < cfg.max_sweep_cycles) {
    const double change = sweeper.cycle(false);
    res.trace.push_back(change);
    ++res.first_order_cycles;
    if (change < cfg.tolerance) {
      converged = true;
      break;
    }
  }
  if (converged && cfg.order == SweepOrder::High) {
    converged = false;
    sweeper.activate_all();
    while (res.high_order_cycles < cfg.max_sweep_cycles) {
      const double change = sweeper.cycle(true);
      res.trace.push_back(change);
      ++res.high_order_cycles;
      if (change < cfg.tolerance) {
        converged = true;
        break;
      }
    }
  }
  res.converged = converged;
  return res;
}

/// Seeds from a narrowband solution: solved voxels are frozen at |distance|,
/// fallback voxels are recomputed.
inline SweepResult sweep_unsigned(const NarrowbandSolution& nb, const SweepConfig& cfg = {}) {
  const auto& g = nb.mask.geometry();
  ScalarField seed(g, 0.0);
  MaskField frozen(g, 0);
  for (const auto& v : nb.solved) {
    seed[v.index] = v.distance;
    frozen[v.index] = 1;
  }
  return sweep_unsigned(seed, frozen, cfg);
}

/// phi = sign(psi) |u|, with psi = 0 mapped to the positive side.
inline ScalarField reattach_sign(const ScalarField& unsigned_distance, const ScalarField& psi) {
  require_same_geometry(unsigned_distance, psi, "reattach_sign");
  ScalarField phi(psi.geometry());
  for (std::size_t n = 0; n < phi.size(); ++n) {
    const double m = std::abs(unsigned_distance[n]);
    phi[n] = psi[n] < 0.0 ? -m : m;
  }
  return phi;
}

struct EmbeddingResult {
  ScalarField phi;
  NarrowbandSolution narrowband;
  SweepResult sweep;
};

/// psi -> narrowband -> sweep -> signed distance field.
inline EmbeddingResult solve_full(const ScalarField& psi, const CPConfig& cp = {}, const SweepConfig& sweep_cfg = {},
                                  int stencil_size = 5) {
  bool negative = false, non_negative = false;
  for (double v : psi) {
    if (v < 0.0) negative = true;
    else non_negative = true;
    if (negative && non_negative) break;
  }
  if (!negative || !non_negative) throw NumericalError("embedding has no zero crossing");

  EmbeddingResult r;
  const MaskField band = select_narrowband(psi, stencil_size);
  if (count(band) == 0) throw NumericalError("embedding has no zero crossing");
  r.narrowband = solve_narrowband(psi, band, cp);
  if (r.narrowband.solved.empty()) throw NumericalError("no narrowband voxel converged");
  r.sweep = sweep_unsigned(r.narrowband, sweep_cfg);
  r.phi = reattach_sign(r.sweep.distance, psi);
  return r;
}

} // namespace hosdf
