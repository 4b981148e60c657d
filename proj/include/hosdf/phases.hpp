#pragma once

// Two-phase density estimation from a density image and an embedding
// (Chan-Vese style region means with a regularised Heaviside).

#include <stdexcept>
#include <string>

#include "hosdf/error.hpp"
#include "hosdf/grid.hpp"
#include "hosdf/heaviside.hpp"
#include "hosdf/quadrature.hpp"

namespace hosdf {

struct PhaseDensities {
  double rho1 = 0.0; ///< phase inside the embedding (phi < 0)
  double rho2 = 0.0; ///< phase outside
  double eps = 0.0;  ///< Heaviside half-width used
};

inline PhaseDensities estimate_phases(const ScalarField& rho_smoothed, const ScalarField& phi, double eps) {
  require_same_geometry(rho_smoothed, phi, "estimate_phases");
  if (!(eps > 0.0)) throw std::invalid_argument("estimate_phases: eps must be positive");
  const auto& g = phi.geometry();
  const double in_mass = integrate_simpson(g, [&](auto, auto, auto, std::size_t n) { return heaviside_eps(-phi[n], eps); });
  const double out_mass = integrate_simpson(g, [&](auto, auto, auto, std::size_t n) { return 1.0 - heaviside_eps(-phi[n], eps); });
  if (!(in_mass > 0.0)) throw NumericalError("estimate_phases: inside phase (phi < 0) is empty");
  if (!(out_mass > 0.0)) throw NumericalError("estimate_phases: outside phase (phi > 0) is empty");
  const double in_sum =
      integrate_simpson(g, [&](auto, auto, auto, std::size_t n) { return rho_smoothed[n] * heaviside_eps(-phi[n], eps); });
  const double out_sum = integrate_simpson(
      g, [&](auto, auto, auto, std::size_t n) { return rho_smoothed[n] * (1.0 - heaviside_eps(-phi[n], eps)); });
  return {in_sum / in_mass, out_sum / out_mass, eps};
}

inline ScalarField reconstruct_density(const ScalarField& phi, const PhaseDensities& p) {
  if (!(p.eps > 0.0)) throw std::invalid_argument("reconstruct_density: eps must be positive");
  ScalarField rho(phi.geometry());
  for (std::size_t n = 0; n < phi.size(); ++n) {
    const double t = heaviside_eps(-phi[n], p.eps);
    rho[n] = p.rho1 * t + p.rho2 * (1.0 - t);
  }
  return rho;
}

} // namespace hosdf
