#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hosdf/grid.hpp"

namespace hosdf {

struct ErrorNorms {
  double l1 = 0.0;   ///< mean absolute difference over the mask
  double linf = 0.0; ///< maximum absolute difference over the mask
  std::size_t count = 0;
};

inline ErrorNorms error_norms(const ScalarField& candidate, const ScalarField& truth, const MaskField& mask) {
  require_same_geometry(candidate, truth, "error_norms");
  require_same_geometry(candidate, mask, "error_norms");
  ErrorNorms e;
  double sum = 0.0;
  for (std::size_t n = 0; n < candidate.size(); ++n) {
    if (!mask[n]) continue;
    const double d = std::abs(candidate[n] - truth[n]);
    sum += d;
    e.linf = std::max(e.linf, d);
    ++e.count;
  }
  if (e.count == 0) throw std::invalid_argument("error_norms: empty mask");
  e.l1 = sum / static_cast<double>(e.count);
  return e;
}

} // namespace hosdf
