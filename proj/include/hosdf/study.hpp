#pragma once

// Refinement studies on analytic phantoms: narrowband accuracy and sweeping
// extension accuracy, one row per grid spacing.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hosdf/narrowband.hpp"
#include "hosdf/norms.hpp"
#include "hosdf/phantom.hpp"
#include "hosdf/sweep.hpp"

namespace hosdf {

enum class StudyStage { Narrowband, Sweep };

struct StudySettings {
  double rho1 = 100.0;
  double rho2 = 0.0;
  double eps_synth = 2.0;
  int stencil_size = 5;
  double min_spacing = 0.0625; ///< refuse finer grids (memory guard)
  CPConfig cp;
  SweepConfig sweep;
};

struct StudyRow {
  std::string surface;
  StudyStage stage = StudyStage::Narrowband;
  SweepOrder order = SweepOrder::High;
  double h = 0.0;
  std::size_t voxels = 0;   ///< voxels in the error norm
  double l1 = 0.0, linf = 0.0;
  std::optional<double> l1_order, linf_order;
  double iterations = 0.0;  ///< narrowband: mean gradient-flow steps; sweep: cycles
  std::size_t fallback = 0; ///< narrowband voxels that did not converge
  bool converged = true;
};

/// psi = T - rho for the biphasic phantom of `phi` (no smoothing, T midway).
inline ScalarField phantom_embedding(const ScalarField& phi, const StudySettings& s) {
  ScalarField rho = synth_density(phi, s.rho1, s.rho2, s.eps_synth);
  const double threshold = midphase_threshold(s.rho1, s.rho2);
  for (double& v : rho) v = threshold - v;
  // Inside (phi < 0) must map to psi < 0 whichever phase is denser.
  if (s.rho1 < s.rho2)
    for (double& v : rho) v = -v;
  return rho;
}

inline StudyRow narrowband_row(const AnalyticSurface& surface, double h, const StudySettings& s) {
  const GridGeometry g = phantom_geometry(h);
  const ScalarField truth = analytic_sdf(surface, g);
  const ScalarField psi = phantom_embedding(truth, s);
  const MaskField band = select_narrowband(psi, s.stencil_size);
  const NarrowbandSolution sol = solve_narrowband(psi, band, s.cp);

  StudyRow row;
  row.surface = std::string(surface_name(surface.kind));
  row.stage = StudyStage::Narrowband;
  row.h = h;
  row.fallback = sol.fallback.size();
  double sum = 0.0, total_iters = 0.0;
  for (const auto& v : sol.solved) {
    const double e = std::abs(v.distance - truth[v.index]);
    sum += e;
    row.linf = std::max(row.linf, e);
    total_iters += v.iterations;
  }
  row.voxels = sol.solved.size();
  if (row.voxels == 0) throw NumericalError("narrowband study: no voxel converged");
  row.l1 = sum / static_cast<double>(row.voxels);
  row.iterations = total_iters / static_cast<double>(row.voxels);
  row.converged = sol.fallback.empty();
  return row;
}

/// Extension from an exact narrowband; errors off the band.
inline StudyRow sweep_row(const AnalyticSurface& surface, double h, SweepOrder order, const StudySettings& s) {
  const GridGeometry g = phantom_geometry(h);
  const ScalarField truth = analytic_sdf(surface, g);
  const ScalarField psi = phantom_embedding(truth, s);
  const MaskField band = select_narrowband(psi, s.stencil_size);
  SweepConfig cfg = s.sweep;
  cfg.order = order;
  const SweepResult sw = sweep_unsigned(truth, band, cfg);
  const ScalarField phi = reattach_sign(sw.distance, psi);

  MaskField off(g, 0);
  for (std::size_t n = 0; n < off.size(); ++n) off[n] = !band[n];
  const ErrorNorms e = error_norms(phi, truth, off);

  StudyRow row;
  row.surface = std::string(surface_name(surface.kind));
  row.stage = StudyStage::Sweep;
  row.order = order;
  row.h = h;
  row.voxels = e.count;
  row.l1 = e.l1;
  row.linf = e.linf;
  row.iterations = sw.cycles();
  row.converged = sw.converged;
  return row;
}

/// One row per spacing, with orders against the previous (coarser) row.
inline std::vector<StudyRow> run_study(const AnalyticSurface& surface, StudyStage stage, SweepOrder order,
                                       const std::vector<double>& spacings, const StudySettings& s = {}) {
  if (spacings.empty()) throw std::invalid_argument("study needs at least one spacing");
  for (std::size_t i = 0; i < spacings.size(); ++i) {
    if (spacings[i] < s.min_spacing)
      throw std::invalid_argument("spacing " + std::to_string(spacings[i]) + " is below the memory floor " +
                                  std::to_string(s.min_spacing));
    if (i > 0 && std::abs(spacings[i] * 2.0 - spacings[i - 1]) > 1e-12 * spacings[i - 1])
      throw std::invalid_argument("study spacings must halve at each step");
  }
  std::vector<StudyRow> rows;
  for (double h : spacings) {
    StudyRow row = stage == StudyStage::Narrowband ? narrowband_row(surface, h, s) : sweep_row(surface, h, order, s);
    if (!rows.empty()) {
      const StudyRow& prev = rows.back();
      if (prev.l1 > 0 && row.l1 > 0) row.l1_order = order_estimate(prev.l1, row.l1);
      if (prev.linf > 0 && row.linf > 0) row.linf_order = order_estimate(prev.linf, row.linf);
    }
    rows.push_back(row);
  }
  return rows;
}

} // namespace hosdf
