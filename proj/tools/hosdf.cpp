// hosdf: command-line front-end.
//
// Exit codes: 0 success, 1 usage, 2 I/O, 3 numerical failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "hosdf/hosdf.hpp"

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;
using namespace hosdf;

constexpr const char* kVersion = "1.0.0";

enum ExitCode { kOk = 0, kUsage = 1, kIo = 2, kNumerical = 3 };

std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json provenance(const std::string& command, const json& config) {
  json p;
  p["tool"] = "hosdf";
  p["version"] = kVersion;
  p["stage"] = command;
  p["config_hash"] = fnv1a_hex(config.dump());
  p["config"] = config;
  return p;
}

std::map<std::string, std::string> mhd_extra(const json& prov) { return {{"Provenance", prov.dump()}}; }

std::ofstream open_text(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void write_json(const fs::path& path, const json& j) {
  auto out = open_text(path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

void write_trace_csv(const fs::path& path, const SweepResult& sw, const json& prov) {
  auto out = open_text(path);
  out << "# provenance: " << prov.dump() << '\n' << "cycle,phase,max_update\n";
  for (std::size_t c = 0; c < sw.trace.size(); ++c)
    out << c + 1 << ',' << (static_cast<int>(c) < sw.first_order_cycles ? "first" : "high") << ',' << sw.trace[c] << '\n';
}

SweepOrder parse_order(const std::string& s) { return s == "first" ? SweepOrder::First : SweepOrder::High; }

ElementType parse_element(const std::string& s) {
  if (s == "short") return ElementType::Short;
  if (s == "float") return ElementType::Float;
  return ElementType::Double;
}

json report_json(const MorphometryReport& r) {
  return json{{"V", r.V},       {"A", r.A},         {"mean_H", r.mean_H}, {"mean_K", r.mean_K}, {"total_H", r.total_H},
              {"total_K", r.total_K}, {"chi", r.chi}, {"tv", r.tv},       {"bv", r.bv},         {"bs", r.bs},
              {"bvtv", r.bvtv}, {"smi", r.smi},     {"tbpf", r.tbpf},     {"connd", r.connd},   {"eps", r.eps},
              {"clamped", r.clamped}, {"degenerate", r.degenerate}};
}

// Options shared by the commands that run the closest-point solver.
struct SolverOptions {
  int stencil = 5;
  std::string order = "high";
  double cp_tolerance_scale = 1e-6;
  double cp_beta = 0.5;
  int cp_max_iters = 100;
  double sweep_tolerance = 1e-10;
  int max_sweep_cycles = 100;

  void add(CLI::App* cmd) {
    cmd->add_option("--stencil", stencil, "finite-difference stencil size (odd, >= 3)")->check(CLI::Range(3, 99));
    cmd->add_option("--order", order, "sweeping order")->check(CLI::IsMember({"first", "high"}));
    cmd->add_option("--cp-tolerance-scale", cp_tolerance_scale, "closest-point tolerance as a multiple of h^3")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--cp-beta", cp_beta, "tangent-plane step fraction")->check(CLI::Range(1e-12, 1.0));
    cmd->add_option("--cp-max-iters", cp_max_iters, "iteration cap for each closest-point loop")->check(CLI::PositiveNumber);
    cmd->add_option("--sweep-tolerance", sweep_tolerance, "largest per-cycle update at convergence")->check(CLI::PositiveNumber);
    cmd->add_option("--max-sweep-cycles", max_sweep_cycles, "cycle cap per sweeping phase")->check(CLI::PositiveNumber);
  }
  CPConfig cp() const {
    CPConfig c;
    c.tolerance_scale = cp_tolerance_scale;
    c.beta = cp_beta;
    c.max_iters = cp_max_iters;
    return c;
  }
  SweepConfig sweep() const {
    SweepConfig s;
    s.order = parse_order(order);
    s.tolerance = sweep_tolerance;
    s.max_sweep_cycles = max_sweep_cycles;
    return s;
  }
  void echo(json& j) const {
    j["stencil"] = stencil;
    j["order"] = order;
    j["cp_tolerance_scale"] = cp_tolerance_scale;
    j["cp_beta"] = cp_beta;
    j["cp_max_iters"] = cp_max_iters;
    j["sweep_tolerance"] = sweep_tolerance;
    j["max_sweep_cycles"] = max_sweep_cycles;
  }
};

struct PhantomCmd {
  std::string surface = "sphere", field = "sdf", element = "double";
  double h = 0.25, half_width = 10.0, rho1 = 100.0, rho2 = 0.0, eps_synth = 2.0;
  fs::path out;

  int run() const {
    const AnalyticSurface s = reference_surface(surface);
    const GridGeometry g = phantom_geometry(h, half_width);
    ScalarField f = analytic_sdf(s, g);
    if (field == "density") f = synth_density(f, rho1, rho2, eps_synth);
    json cfg{{"surface", surface}, {"field", field}, {"h", h}, {"half_width", half_width}};
    if (field == "density") {
      cfg["rho1"] = rho1;
      cfg["rho2"] = rho2;
      cfg["eps_synth"] = eps_synth;
    }
    write_metaimage(f, out, parse_element(element), mhd_extra(provenance("phantom", cfg)));
    return kOk;
  }
};

struct EmbedCmd {
  fs::path input, out, psi_out, stats, trace;
  double sigma = 0.0, threshold = 0.0;
  bool psi_only = false;
  SolverOptions solver;

  int run() const {
    const ScalarField rho = read_metaimage(input);
    const ScalarField psi = implicit_surface(rho, sigma, threshold);
    if (!has_zero_crossing(psi)) throw NumericalError("psi = T - G*rho has no zero crossing (threshold outside the density range?)");
    json cfg{{"input", input.string()}, {"sigma", sigma}, {"threshold", threshold}, {"psi_only", psi_only}};
    solver.echo(cfg);
    const json prov = provenance("embed", cfg);
    if (psi_only) {
      write_metaimage(psi, out, ElementType::Double, mhd_extra(prov));
      return kOk;
    }
    const EmbeddingResult r = solve_full(psi, solver.cp(), solver.sweep(), solver.stencil);
    if (!psi_out.empty()) write_metaimage(psi, psi_out, ElementType::Double, mhd_extra(prov));
    write_metaimage(r.phi, out, ElementType::Double, mhd_extra(prov));
    if (!stats.empty()) {
      auto s = open_text(stats);
      s << "# provenance: " << prov.dump() << '\n';
      s << "loop,iterations,voxels\n";
      for (const auto& [iters, voxels] : r.narrowband.inner_histogram) s << "inner," << iters << ',' << voxels << '\n';
      for (const auto& [iters, voxels] : r.narrowband.outer_histogram) s << "outer," << iters << ',' << voxels << '\n';
      s << "fallback,," << r.narrowband.fallback.size() << '\n';
    }
    if (!trace.empty()) write_trace_csv(trace, r.sweep, prov);
    std::cerr << "narrowband: " << r.narrowband.solved.size() << " solved, " << r.narrowband.fallback.size()
              << " fallback; sweep: " << r.sweep.first_order_cycles << "+" << r.sweep.high_order_cycles << " cycles\n";
    if (!r.sweep.converged) {
      std::cerr << "sweeping did not converge within " << solver.max_sweep_cycles << " cycles\n";
      return kNumerical;
    }
    return kOk;
  }
};

struct SweepCmd {
  fs::path input, out, trace;
  SolverOptions solver;

  int run() const {
    const ScalarField phi_in = read_metaimage(input);
    if (!has_zero_crossing(phi_in)) throw NumericalError("input field has no zero crossing");
    const MaskField band = select_narrowband(phi_in, solver.stencil);
    const SweepResult sw = sweep_unsigned(phi_in, band, solver.sweep());
    const ScalarField phi = reattach_sign(sw.distance, phi_in);
    json cfg{{"input", input.string()}};
    solver.echo(cfg);
    const json prov = provenance("sweep", cfg);
    write_metaimage(phi, out, ElementType::Double, mhd_extra(prov));
    if (!trace.empty()) write_trace_csv(trace, sw, prov);
    if (!sw.converged) {
      std::cerr << "sweeping did not converge within " << solver.max_sweep_cycles << " cycles\n";
      return kNumerical;
    }
    return kOk;
  }
};

struct PhasesCmd {
  fs::path density, phi_path, out, reconstruct;
  double sigma = 0.0, eps = 0.0;

  int run() const {
    const ScalarField rho = gaussian_smooth(read_metaimage(density), sigma);
    const ScalarField phi = read_metaimage(phi_path);
    const double e = eps > 0.0 ? eps : 2.0 * phi.geometry().min_spacing();
    const PhaseDensities p = estimate_phases(rho, phi, e);
    json cfg{{"density", density.string()}, {"phi", phi_path.string()}, {"sigma", sigma}, {"eps", e}};
    const json prov = provenance("phases", cfg);
    json j{{"rho1", p.rho1}, {"rho2", p.rho2}, {"eps", p.eps}, {"units", "input density units"}, {"provenance", prov}};
    ScalarField rec;
    if (!reconstruct.empty()) rec = reconstruct_density(phi, p);
    if (!reconstruct.empty()) write_metaimage(rec, reconstruct, ElementType::Double, mhd_extra(prov));
    if (out.empty()) std::cout << j.dump(2) << '\n';
    else write_json(out, j);
    return kOk;
  }
};

struct MorphoCmd {
  fs::path phi_path, density, json_out, csv_out, mesh_out;
  double eps_morph = 2.0, sigma = 0.0;
  bool ascii = false;

  int run() const {
    const ScalarField phi = read_metaimage(phi_path);
    const double h = phi.geometry().min_spacing();
    const MorphometryReport r = measure(phi, eps_morph * h);
    json cfg{{"phi", phi_path.string()}, {"eps_morph", eps_morph}};
    std::optional<PhaseDensities> phases;
    if (!density.empty()) {
      phases = estimate_phases(gaussian_smooth(read_metaimage(density), sigma), phi, eps_morph * h);
      cfg["density"] = density.string();
      cfg["sigma"] = sigma;
    }
    TriMesh mesh;
    if (!mesh_out.empty()) {
      mesh = marching_cubes(phi, 0.0);
      const CurvatureFields c = curvature_fields(phi);
      sample_vertex_channel(mesh, build_spline(c.mean), "H");
      sample_vertex_channel(mesh, build_spline(c.gaussian), "K");
    }
    const json prov = provenance("morpho", cfg);
    json j = report_json(r);
    if (phases) j["phases"] = json{{"rho1", phases->rho1}, {"rho2", phases->rho2}, {"eps", phases->eps}};
    j["provenance"] = prov;

    if (json_out.empty() && csv_out.empty()) std::cout << j.dump(2) << '\n';
    if (!json_out.empty()) write_json(json_out, j);
    if (!csv_out.empty()) {
      auto out = open_text(csv_out);
      out << "# provenance: " << prov.dump() << '\n' << "input," << kReportColumns << '\n' << phi_path.string() << ',';
      write_report_csv_row(out, r);
    }
    if (!mesh_out.empty())
      write_ply(mesh, mesh_out, ascii ? PlyFormat::Ascii : PlyFormat::BinaryLittleEndian, {"provenance " + prov.dump()});
    return kOk;
  }
};

struct MeshCmd {
  fs::path input, out;
  double level = 0.0;
  std::vector<std::string> channels;
  bool ascii = false;

  int run() const {
    const ScalarField phi = read_metaimage(input);
    TriMesh mesh = marching_cubes(phi, level);
    if (!channels.empty()) {
      const CurvatureFields c = curvature_fields(phi);
      for (const auto& name : channels) sample_vertex_channel(mesh, build_spline(name == "H" ? c.mean : c.gaussian), name);
    }
    json cfg{{"input", input.string()}, {"level", level}, {"channels", channels}};
    write_ply(mesh, out, ascii ? PlyFormat::Ascii : PlyFormat::BinaryLittleEndian,
              {"provenance " + provenance("mesh", cfg).dump()});
    std::cerr << mesh.vertices.size() << " vertices, " << mesh.triangles.size() << " triangles, "
              << connected_components(mesh) << " components\n";
    return kOk;
  }
};

struct VerifyCmd {
  std::string surface = "sphere", stage = "narrowband", order = "high";
  std::vector<double> spacings{0.5, 0.25, 0.125};
  double min_h = 0.0625, cp_tolerance_scale = 1e-6;
  fs::path out;

  int run() const {
    StudySettings s;
    s.min_spacing = min_h;
    s.cp.tolerance_scale = cp_tolerance_scale;
    const auto rows = run_study(reference_surface(surface), stage == "sweep" ? StudyStage::Sweep : StudyStage::Narrowband,
                                parse_order(order), spacings, s);
    json cfg{{"surface", surface}, {"stage", stage}, {"h", spacings}, {"rho1", s.rho1}, {"rho2", s.rho2},
             {"eps_synth", s.eps_synth}, {"threshold", midphase_threshold(s.rho1, s.rho2)}, {"stencil", s.stencil_size},
             {"cp_tolerance_scale", cp_tolerance_scale}};
    if (stage == "sweep") cfg["order"] = order;
    std::ostringstream table;
    table << "# provenance: " << provenance("verify", cfg).dump() << '\n';
    write_study_csv(table, rows);
    if (out.empty()) std::cout << table.str();
    else {
      auto f = open_text(out);
      f << table.str();
    }
    return kOk;
  }
};

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"High-order signed distance fields, phase densities and morphometry from volumetric images"};
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "", "read options from a TOML/INI file (flags on the command line win)");
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker thread cap (0 = runtime default)")->check(CLI::NonNegativeNumber);

  const auto surfaces = CLI::IsMember({"sphere", "torus", "double_spheres", "cylinder", "slab"});

  PhantomCmd phantom;
  auto* c_phantom = app.add_subcommand("phantom", "write an analytic phantom (SDF or synthetic density)");
  c_phantom->add_option("--surface", phantom.surface)->check(surfaces);
  c_phantom->add_option("--field", phantom.field)->check(CLI::IsMember({"sdf", "density"}));
  c_phantom->add_option("--spacing", phantom.h, "grid spacing")->check(CLI::PositiveNumber);
  c_phantom->add_option("--half-width", phantom.half_width)->check(CLI::PositiveNumber);
  c_phantom->add_option("--rho1", phantom.rho1, "inside density");
  c_phantom->add_option("--rho2", phantom.rho2, "outside density");
  c_phantom->add_option("--eps-synth", phantom.eps_synth, "Heaviside half-width")->check(CLI::PositiveNumber);
  c_phantom->add_option("--element-type", phantom.element)->check(CLI::IsMember({"double", "float", "short"}));
  c_phantom->add_option("-o,--out", phantom.out)->required();

  EmbedCmd embed;
  auto* c_embed = app.add_subcommand("embed", "density image -> psi = T - G*rho -> signed distance phi");
  c_embed->add_option("-i,--input", embed.input)->required();
  c_embed->add_option("-o,--out", embed.out)->required();
  c_embed->add_option("--sigma", embed.sigma, "Gaussian smoothing, physical length")->check(CLI::NonNegativeNumber);
  c_embed->add_option("-T,--threshold", embed.threshold, "density threshold")->required();
  c_embed->add_flag("--psi-only", embed.psi_only, "write psi instead of phi");
  c_embed->add_option("--psi-out", embed.psi_out, "also write psi");
  c_embed->add_option("--stats", embed.stats, "narrowband iteration histogram CSV");
  c_embed->add_option("--trace", embed.trace, "per-cycle sweeping trace CSV");
  embed.solver.add(c_embed);

  SweepCmd sweep;
  auto* c_sweep = app.add_subcommand("sweep", "re-extend a field that is accurate on its narrowband");
  c_sweep->add_option("-i,--input", sweep.input)->required();
  c_sweep->add_option("-o,--out", sweep.out)->required();
  c_sweep->add_option("--trace", sweep.trace, "per-cycle sweeping trace CSV");
  sweep.solver.add(c_sweep);

  PhasesCmd phases;
  auto* c_phases = app.add_subcommand("phases", "estimate the two phase densities");
  c_phases->add_option("--density", phases.density)->required();
  c_phases->add_option("--phi", phases.phi_path)->required();
  c_phases->add_option("--sigma", phases.sigma, "smoothing applied to the density first")->check(CLI::NonNegativeNumber);
  c_phases->add_option("--eps", phases.eps, "Heaviside half-width, physical (default 2h)")->check(CLI::NonNegativeNumber);
  c_phases->add_option("-o,--out", phases.out, "JSON output (default stdout)");
  c_phases->add_option("--reconstruct", phases.reconstruct, "write the reconstructed density");

  MorphoCmd morpho;
  auto* c_morpho = app.add_subcommand("morpho", "morphometry report of phi");
  c_morpho->add_option("--phi", morpho.phi_path)->required();
  c_morpho->add_option("--eps-morph", morpho.eps_morph, "regularisation width in units of h")->check(CLI::PositiveNumber);
  c_morpho->add_option("--density", morpho.density, "also estimate phase densities");
  c_morpho->add_option("--sigma", morpho.sigma)->check(CLI::NonNegativeNumber);
  c_morpho->add_option("--json", morpho.json_out);
  c_morpho->add_option("--csv", morpho.csv_out);
  c_morpho->add_option("--mesh", morpho.mesh_out, "zero level set as PLY with H and K channels");
  c_morpho->add_flag("--ascii", morpho.ascii, "ASCII PLY");

  MeshCmd mesh;
  auto* c_mesh = app.add_subcommand("mesh", "extract a level set as PLY");
  c_mesh->add_option("-i,--input", mesh.input)->required();
  c_mesh->add_option("-o,--out", mesh.out)->required();
  c_mesh->add_option("--level", mesh.level);
  c_mesh->add_option("--channels", mesh.channels, "curvature channels to sample")->check(CLI::IsMember({"H", "K"}));
  c_mesh->add_flag("--ascii", mesh.ascii, "ASCII PLY");

  VerifyCmd verify;
  auto* c_verify = app.add_subcommand("verify", "refinement study on an analytic phantom (CSV)");
  c_verify->add_option("--surface", verify.surface)->check(surfaces);
  c_verify->add_option("--stage", verify.stage)->check(CLI::IsMember({"narrowband", "sweep"}));
  c_verify->add_option("--order", verify.order)->check(CLI::IsMember({"first", "high"}));
  c_verify->add_option("--spacing", verify.spacings, "spacings, halving")->check(CLI::PositiveNumber);
  c_verify->add_option("--min-h", verify.min_h, "memory floor for h")->check(CLI::PositiveNumber);
  c_verify->add_option("--cp-tolerance-scale", verify.cp_tolerance_scale)->check(CLI::PositiveNumber);
  c_verify->add_option("-o,--out", verify.out, "CSV output (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#endif

  try {
    if (c_phantom->parsed()) return phantom.run();
    if (c_embed->parsed()) return embed.run();
    if (c_sweep->parsed()) return sweep.run();
    if (c_phases->parsed()) return phases.run();
    if (c_morpho->parsed()) return morpho.run();
    if (c_mesh->parsed()) return mesh.run();
    if (c_verify->parsed()) return verify.run();
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  }
  return kUsage;
}
