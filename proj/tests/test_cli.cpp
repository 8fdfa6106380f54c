#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "toric/exact.hpp"
#include "toric/io.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
};

// Runs the installed binary with stderr folded into the captured
// stream so diagnostics show up in failure logs.
RunResult run(const std::string& args) {
  const char* bin = std::getenv("INSTANTON_BIN");
  REQUIRE_MESSAGE(bin != nullptr, "INSTANTON_BIN not set");
  const std::string cmd = std::string(bin) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  RunResult res;
  char buf[512];
  while (std::fgets(buf, sizeof buf, pipe)) res.out += buf;
  const int status = pclose(pipe);
  res.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}

fs::path work_dir() {
  const fs::path d = fs::temp_directory_path() / "instanton-cli-test";
  fs::create_directories(d);
  return d;
}

std::string rodfile(const std::string& name, const toric::RodStructure& rs) {
  const fs::path p = work_dir() / name;
  toric::write_rod_file(rs, p.string());
  return p.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("argument errors exit with 2") {
  CHECK(run("").code == 2);
  CHECK(run("frobnicate").code == 2);
  CHECK(run("solve --rods x.json --no-such-flag").code == 2);
  CHECK(run("exact kerr --nr 4").code == 2);     // below the grid floor
  CHECK(run("exact neither").code == 2);         // unknown family
  CHECK(run("verify identities").code == 2);     // needs a subject
  CHECK(run("exact kerr --mu -3").code == 2);
}

TEST_CASE("rod file errors exit with 2") {
  CHECK(run("solve --rods /nonexistent/rods.json --nr 48 --ntheta 49").code ==
        2);

  const fs::path bad = work_dir() / "bad.json";
  std::ofstream(bad) << "{\"beta\": -1, \"omega\": 0, "
                        "\"turning_points\": [1, -1], "
                        "\"rod_vectors\": [[0,1],[2,4],[0,1]]}";
  const RunResult res = run("solve --rods " + bad.string());
  CHECK(res.code == 2);
  // Every schema violation is listed, not just the first.
  CHECK(res.out.find("beta") != std::string::npos);
  CHECK(res.out.find("increasing") != std::string::npos);
  CHECK(res.out.find("coprime") != std::string::npos);
}

TEST_CASE("closed-form identity suite passes") {
  const RunResult res = run("verify identities --exact kerr --alpha 0.5");
  CHECK(res.code == 0);
  CHECK(res.out.find("FAIL") == std::string::npos);
  CHECK(res.out.find("pass") != std::string::npos);

  CHECK(run("verify identities --exact chenteo --xi 0.6").code == 0);
}

TEST_CASE("failed checks exit with 4") {
  const RunResult res =
      run("verify identities --exact kerr --check-tol 1e-30");
  CHECK(res.code == 4);
  CHECK(res.out.find("FAIL") != std::string::npos);
}

TEST_CASE("verify modelmap from a rod file") {
  const std::string rods =
      rodfile("kerr.json", toric::kerr_rods(toric::KerrParams{1.0, 0.3}));
  const RunResult res =
      run("verify modelmap --rods " + rods + " --nr 48 --ntheta 49");
  CHECK(res.code == 0);
  CHECK(res.out.find("det-defect") != std::string::npos);
  CHECK(res.out.find("kernel-angle") != std::string::npos);
  CHECK(res.out.find("tension-ratio") != std::string::npos);
  CHECK(res.out.find("FAIL") == std::string::npos);
}

TEST_CASE("non-convergence exits with 3") {
  const std::string rods = rodfile(
      "schwarzschild.json", toric::kerr_rods(toric::KerrParams{1.0, 0.0}));
  const RunResult res = run("solve --rods " + rods +
                            " --nr 32 --ntheta 33 --rmax 4 --max-iters 3");
  CHECK(res.code == 3);
  CHECK(res.out.find("did not converge") != std::string::npos);
}

TEST_CASE("solve on a small grid converges and reports the mass") {
  const std::string rods = rodfile(
      "schwarzschild.json", toric::kerr_rods(toric::KerrParams{1.0, 0.0}));
  const RunResult res =
      run("solve --rods " + rods + " --nr 64 --ntheta 65 --rmax 8");
  CHECK(res.code == 0);
  double m = 0.0, j = 1.0;
  const auto pos = res.out.find("m ");
  REQUIRE(pos != std::string::npos);
  REQUIRE(std::sscanf(res.out.c_str() + pos, "m %lf j %lf", &m, &j) == 2);
  CHECK(m == doctest::Approx(1.0).epsilon(5e-2));
  CHECK(j == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
}

TEST_CASE("half-flat probe reports the obstruction") {
  const RunResult res = run("halfflat --centers 0,1 --beta-hat 1");
  CHECK(res.code == 0);
  CHECK(res.out.find("verdict: not AF") != std::string::npos);
  double m = 0.0;
  const auto pos = res.out.find("fitted m = ");
  REQUIRE(pos != std::string::npos);
  REQUIRE(std::sscanf(res.out.c_str() + pos, "fitted m = %lf", &m) == 1);
  CHECK(m == doctest::Approx(1.0).epsilon(1e-3));

  const RunResult flat = run("halfflat --beta-hat 1");
  CHECK(flat.code == 0);
  CHECK(flat.out.find("verdict: AF") != std::string::npos);
}

TEST_CASE("exact exports are byte-identical across reruns") {
  const fs::path d1 = work_dir() / "rerun-a";
  const fs::path d2 = work_dir() / "rerun-b";
  fs::remove_all(d1);
  fs::remove_all(d2);
  const std::string args =
      "exact kerr --alpha 0.5 --nr 48 --ntheta 49 --rmax 12 --out ";
  const RunResult r1 = run(args + d1.string());
  const RunResult r2 = run(args + d2.string());
  REQUIRE(r1.code == 0);
  REQUIRE(r2.code == 0);
  CHECK(r1.out == r2.out);
  for (const char* f : {"kerr-field.csv", "kerr-field.csv.json",
                        "kerr-report.json"}) {
    CAPTURE(f);
    const std::string a = slurp(d1 / f);
    REQUIRE(!a.empty());
    CHECK(a == slurp(d2 / f));
  }
}

TEST_CASE("invariants report is well-formed json") {
  const RunResult res = run("invariants --exact chenteo");
  CHECK(res.code == 0);
  CHECK(res.out.find("\"residuals\"") != std::string::npos);
  CHECK(res.out.find("\"q_chi\"") != std::string::npos);

  const RunResult tab = run("invariants --exact kerr --table");
  CHECK(tab.code == 0);
  CHECK(tab.out.find("conical") != std::string::npos);
}
