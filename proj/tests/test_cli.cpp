#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

#include "hosdf/marching_cubes.hpp"
#include "hosdf/mesh_io.hpp"
#include "hosdf/metaimage.hpp"
#include "hosdf/norms.hpp"
#include "hosdf/phantom.hpp"
#include "hosdf/phases.hpp"
#include "test_support.hpp"

using namespace hosdf;
using hosdf::testing::TempDir;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code = -1;
  std::string out, err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

CliRun hosdf_cli(const TempDir& dir, const std::string& args) {
  const fs::path out = dir / "stdout.txt", err = dir / "stderr.txt";
  const std::string cmd = std::string("\"") + HOSDF_CLI_PATH + "\" " + args + " >\"" + out.string() + "\" 2>\"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  CliRun r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

nlohmann::json provenance_of(const fs::path& mhd) {
  std::ifstream in(mhd);
  std::string line;
  while (std::getline(in, line))
    if (line.rfind("Provenance = ", 0) == 0) return nlohmann::json::parse(line.substr(13));
  return {};
}

/// Sphere density phantom (r = 5, rho 100 inside, 0 outside) at spacing 0.5.
fs::path density_phantom(const TempDir& dir) {
  const fs::path p = dir / "rho.mhd";
  const CliRun r = hosdf_cli(dir, "phantom --surface sphere --field density --spacing 0.5 --rho1 100 --rho2 0 -o " + q(p));
  EXPECT_EQ(r.code, 0) << r.err;
  return p;
}

} // namespace

TEST(Cli, VersionHelpAndUsageErrors) {
  const TempDir dir;
  CliRun r = hosdf_cli(dir, "--version");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("1.0.0"), std::string::npos);
  EXPECT_EQ(hosdf_cli(dir, "--help").code, 0);
  EXPECT_EQ(hosdf_cli(dir, "embed --help").code, 0);
  EXPECT_EQ(hosdf_cli(dir, "").code, 1);
  EXPECT_EQ(hosdf_cli(dir, "bogus").code, 1);
  EXPECT_EQ(hosdf_cli(dir, "phantom --surface cube -o x.mhd").code, 1);
  EXPECT_EQ(hosdf_cli(dir, "phantom --spacing 0.3 -o " + q(dir / "x.mhd")).code, 1);
  EXPECT_FALSE(fs::exists(dir / "x.mhd"));
}

TEST(Cli, PhantomCarriesProvenance) {
  const TempDir dir;
  const fs::path p = dir / "t.mhd";
  ASSERT_EQ(hosdf_cli(dir, "phantom --surface torus --spacing 1 -o " + q(p)).code, 0);
  const nlohmann::json prov = provenance_of(p);
  EXPECT_EQ(prov["tool"], "hosdf");
  EXPECT_EQ(prov["stage"], "phantom");
  EXPECT_EQ(prov["config"]["surface"], "torus");
  EXPECT_EQ(prov["config_hash"].get<std::string>().size(), 16u);
  const ScalarField f = read_metaimage(p);
  const ScalarField want = analytic_sdf(reference_surface("torus"), phantom_geometry(1.0));
  EXPECT_EQ(f.values(), want.values());
  // Same configuration, same hash.
  const fs::path p2 = dir / "t2.mhd";
  ASSERT_EQ(hosdf_cli(dir, "phantom --surface torus --spacing 1 -o " + q(p2)).code, 0);
  EXPECT_EQ(provenance_of(p2)["config_hash"], prov["config_hash"]);
}

TEST(Cli, EmbedRecoversSphereDistance) {
  const TempDir dir;
  const fs::path rho = density_phantom(dir), phi = dir / "phi.mhd", stats = dir / "stats.csv", trace = dir / "trace.csv";
  const CliRun r = hosdf_cli(dir, "embed -i " + q(rho) + " -o " + q(phi) + " -T 50 --stats " + q(stats) + " --trace " + q(trace));
  ASSERT_EQ(r.code, 0) << r.err;
  const ScalarField got = read_metaimage(phi);
  const ScalarField truth = analytic_sdf(AnalyticSurface::sphere(5.0), got.geometry());
  const ErrorNorms e = error_norms(got, truth, MaskField(got.geometry(), 1));
  EXPECT_LT(e.linf, 0.25);
  EXPECT_EQ(provenance_of(phi)["stage"], "embed");
  EXPECT_EQ(slurp(stats).rfind("# provenance: ", 0), 0u);
  EXPECT_NE(slurp(trace).find("cycle,phase,max_update"), std::string::npos);
}

TEST(Cli, FailuresLeaveNoOutput) {
  const TempDir dir;
  const fs::path rho = density_phantom(dir), phi = dir / "phi.mhd";
  // Threshold above every density value: no surface.
  CliRun r = hosdf_cli(dir, "embed -i " + q(rho) + " -o " + q(phi) + " -T 500");
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("zero crossing"), std::string::npos);
  EXPECT_FALSE(fs::exists(phi));
  r = hosdf_cli(dir, "embed -i " + q(dir / "missing.mhd") + " -o " + q(phi) + " -T 50");
  EXPECT_EQ(r.code, 2);
  EXPECT_FALSE(fs::exists(phi));
  r = hosdf_cli(dir, "embed -i " + q(rho) + " -o " + q(phi) + " -T 50 --stencil 4");
  EXPECT_EQ(r.code, 1);
  EXPECT_FALSE(fs::exists(phi));
  r = hosdf_cli(dir, "morpho --phi " + q(dir / "missing.mhd") + " --json " + q(dir / "m.json"));
  EXPECT_EQ(r.code, 2);
  EXPECT_FALSE(fs::exists(dir / "m.json"));
}

TEST(Cli, MorphoPhasesAndMesh) {
  const TempDir dir;
  const fs::path sdf = dir / "sdf.mhd", rho = density_phantom(dir);
  ASSERT_EQ(hosdf_cli(dir, "phantom --surface sphere --spacing 0.5 -o " + q(sdf)).code, 0);

  const fs::path js = dir / "m.json", csv = dir / "m.csv", ply = dir / "m.ply";
  CliRun r = hosdf_cli(dir, "morpho --phi " + q(sdf) + " --density " + q(rho) + " --json " + q(js) + " --csv " + q(csv) +
                             " --mesh " + q(ply));
  ASSERT_EQ(r.code, 0) << r.err;
  const nlohmann::json m = nlohmann::json::parse(slurp(js));
  EXPECT_NEAR(m["chi"].get<double>(), 2.0, 0.1);
  EXPECT_NEAR(m["A"].get<double>(), 100 * std::numbers::pi, 0.02 * 100 * std::numbers::pi);
  EXPECT_GT(m["phases"]["rho1"].get<double>(), m["phases"]["rho2"].get<double>());
  EXPECT_EQ(m["provenance"]["stage"], "morpho");
  const std::string table = slurp(csv);
  EXPECT_EQ(table.rfind("# provenance: ", 0), 0u);
  EXPECT_NE(table.find("input,V,A,mean_H"), std::string::npos);
  const TriMesh mesh = read_ply(ply);
  EXPECT_TRUE(is_closed_manifold(mesh));
  ASSERT_NE(mesh.channel("H"), nullptr);
  ASSERT_NE(mesh.channel("K"), nullptr);
  for (double h : *mesh.channel("H")) EXPECT_NEAR(h, 0.2, 0.02);

  r = hosdf_cli(dir, "phases --density " + q(rho) + " --phi " + q(sdf));
  ASSERT_EQ(r.code, 0) << r.err;
  const nlohmann::json p = nlohmann::json::parse(r.out);
  const PhaseDensities want = estimate_phases(read_metaimage(rho), read_metaimage(sdf), 1.0);
  EXPECT_NEAR(p["rho1"].get<double>(), want.rho1, 1e-9 * want.rho1);
  EXPECT_NEAR(p["rho2"].get<double>(), want.rho2, 1e-9);
  EXPECT_DOUBLE_EQ(p["eps"].get<double>(), 1.0);

  const fs::path ply2 = dir / "lvl.ply";
  r = hosdf_cli(dir, "mesh -i " + q(sdf) + " -o " + q(ply2) + " --level -2 --channels H --ascii");
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string text = slurp(ply2);
  EXPECT_NE(text.find("format ascii"), std::string::npos);
  EXPECT_NE(text.find("comment provenance "), std::string::npos);
  const TriMesh inner = read_ply(ply2);
  for (const Vec3& v : inner.vertices) EXPECT_NEAR(norm(v), 3.0, 0.05);
}

TEST(Cli, SweepReextendsField) {
  const TempDir dir;
  const fs::path sdf = dir / "sdf.mhd", out = dir / "swept.mhd";
  ASSERT_EQ(hosdf_cli(dir, "phantom --surface sphere --spacing 1 -o " + q(sdf)).code, 0);
  CliRun r = hosdf_cli(dir, "sweep -i " + q(sdf) + " -o " + q(out));
  ASSERT_EQ(r.code, 0) << r.err;
  const ScalarField a = read_metaimage(sdf), b = read_metaimage(out);
  EXPECT_LT(error_norms(b, a, MaskField(a.geometry(), 1)).linf, 0.5);
  r = hosdf_cli(dir, "sweep -i " + q(sdf) + " -o " + q(dir / "capped.mhd") + " --max-sweep-cycles 1");
  EXPECT_EQ(r.code, 3);
}

TEST(Cli, VerifyTableAndConfigFile) {
  const TempDir dir;
  CliRun r = hosdf_cli(dir, "verify --surface sphere --stage narrowband --spacing 1 0.5");
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line.rfind("# provenance: ", 0), 0u);
  std::getline(lines, line);
  EXPECT_EQ(line, "surface,stage,order,h,voxels,l1,l1_order,linf,linf_order,iterations,fallback,converged");
  int rows = 0;
  while (std::getline(lines, line)) rows += line.rfind("sphere,narrowband", 0) == 0;
  EXPECT_EQ(rows, 2);

  const fs::path cfg = dir / "run.toml", p = dir / "cfg.mhd";
  std::ofstream(cfg) << "threads = 2\n[phantom]\nsurface = \"slab\"\nspacing = 1.0\n";
  r = hosdf_cli(dir, "--config " + q(cfg) + " phantom -o " + q(p));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(provenance_of(p)["config"]["surface"], "slab");
  // The command line wins over the file.
  r = hosdf_cli(dir, "--config " + q(cfg) + " phantom --surface sphere -o " + q(p));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(provenance_of(p)["config"]["surface"], "sphere");
}
