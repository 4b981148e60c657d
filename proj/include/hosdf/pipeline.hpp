#pragma once

// Pipeline pieces shared by the command-line front-end: the implicit
// surface psi = T - G_sigma * rho and the CSV layouts of study tables and
// morphometry reports.

#include <cmath>
#include <iomanip>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hosdf/error.hpp"
#include "hosdf/morphometry.hpp"
#include "hosdf/smoothing.hpp"
#include "hosdf/study.hpp"

namespace hosdf {

/// psi = T - G_sigma * rho. The dense phase (rho > T) ends up negative.
inline ScalarField implicit_surface(const ScalarField& rho, double sigma, double threshold) {
  ScalarField psi = gaussian_smooth(rho, sigma);
  for (double& v : psi) v = threshold - v;
  return psi;
}

/// True if psi takes both a negative and a non-negative value.
inline bool has_zero_crossing(const ScalarField& psi) {
  bool neg = false, pos = false;
  for (double v : psi) {
    (v < 0.0 ? neg : pos) = true;
    if (neg && pos) return true;
  }
  return false;
}

inline const char* stage_name(StudyStage s) { return s == StudyStage::Narrowband ? "narrowband" : "sweep"; }
inline const char* order_name(SweepOrder o) { return o == SweepOrder::First ? "first" : "high"; }

inline const char* kStudyColumns = "surface,stage,order,h,voxels,l1,l1_order,linf,linf_order,iterations,fallback,converged";

inline void write_study_csv(std::ostream& out, const std::vector<StudyRow>& rows) {
  auto opt = [&](const std::optional<double>& v) {
    if (v) out << std::setprecision(4) << *v;
  };
  out << kStudyColumns << '\n';
  for (const auto& r : rows) {
    out << r.surface << ',' << stage_name(r.stage) << ',' << (r.stage == StudyStage::Sweep ? order_name(r.order) : "")
        << ',' << std::setprecision(6) << r.h << ',' << r.voxels << ',' << std::setprecision(6) << r.l1 << ',';
    opt(r.l1_order);
    out << ',' << std::setprecision(6) << r.linf << ',';
    opt(r.linf_order);
    out << ',' << std::setprecision(6) << r.iterations << ',' << r.fallback << ',' << (r.converged ? 1 : 0) << '\n';
  }
}

inline const char* kReportColumns = "V,A,mean_H,mean_K,total_H,total_K,chi,tv,bv,bs,bvtv,smi,tbpf,connd,eps,clamped,degenerate";

inline void write_report_csv_row(std::ostream& out, const MorphometryReport& r) {
  out << std::setprecision(10) << r.V << ',' << r.A << ',' << r.mean_H << ',' << r.mean_K << ',' << r.total_H << ','
      << r.total_K << ',' << r.chi << ',' << r.tv << ',' << r.bv << ',' << r.bs << ',' << r.bvtv << ',' << r.smi << ','
      << r.tbpf << ',' << r.connd << ',' << r.eps << ',' << r.clamped << ',' << r.degenerate << '\n';
}

} // namespace hosdf
