#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "toric/analysis.hpp"
#include "toric/exact.hpp"
#include "toric/halfflat.hpp"
#include "toric/invariants.hpp"
#include "toric/io.hpp"
#include "toric/modelmap.hpp"
#include "toric/solver.hpp"

namespace {

using namespace toric;

struct GridArgs {
  int nr = 400;
  int ntheta = 400;
  double rmax = 40.0;

  PolarGrid grid() const { return PolarGrid{nr, ntheta, rmax}; }
};

struct SolveArgs {
  double tol = 1e-9;
  int max_iters = 200000;
  unsigned seed = 1;
  double perturb = 0.0;

  SolverOptions options() const {
    SolverOptions o;
    o.tol = tol;
    o.max_iters = max_iters;
    o.seed = seed;
    o.perturb = perturb;
    return o;
  }
};

struct ExactArgs {
  std::string name;
  double mu = 1.0;
  double alpha = 0.5;
  double xi = 0.6;
  double kappa = 1.0;
};

class FlatSource final : public GramSource {
 public:
  FlatSource() { rs_.rod_vectors = {{0, 1}}; }
  const RodStructure& rods() const override { return rs_; }
  Mat2 gram(const WeylPoint& p) const override {
    return to_psichi(tauphi_gram(1.0, 0.0, p.rho), rs_.beta_hat(), 0.0);
  }
  bool has_nu() const override { return true; }
  double nu(const WeylPoint&) const override { return 0.0; }

 private:
  RodStructure rs_;
};

std::unique_ptr<GramSource> make_exact(const ExactArgs& ex) {
  if (ex.name == "kerr")
    return std::make_unique<KerrSource>(KerrParams{ex.mu, ex.alpha});
  if (ex.name == "chenteo")
    return std::make_unique<ChenTeoSource>(ChenTeoParams{ex.kappa, ex.xi});
  return std::make_unique<FlatSource>();
}

InvariantsReport exact_report(const ExactArgs& ex) {
  if (ex.name == "kerr") return kerr_invariants(KerrParams{ex.mu, ex.alpha});
  if (ex.name == "chenteo")
    return chenteo_invariants(ChenTeoParams{ex.kappa, ex.xi});
  InvariantsReport rep;
  rep.m = 0.0;
  rep.j = 0.0;
  return rep;
}

void print_report(const InvariantsReport& rep, bool table) {
  std::fputs((table ? report_table(rep) : report_json(rep)).c_str(), stdout);
}

std::filesystem::path out_path(const std::string& dir,
                               const std::string& file) {
  std::filesystem::create_directories(dir);
  return std::filesystem::path(dir) / file;
}

void export_state(FieldState& fs, const std::string& dir,
                  const std::string& stem) {
  if (dir.empty()) return;
  if (!fs.has_nu) compute_nu(fs);
  write_field_csv(fs, out_path(dir, stem + "-field.csv").string());
}

int run_exact(const ExactArgs& ex, const GridArgs& ga,
              const std::string& out, bool table) {
  auto src = make_exact(ex);
  InvariantsReport rep = exact_report(ex);
  print_report(rep, table);
  if (!out.empty()) {
    FieldState fs = sample_state(*src, ga.grid());
    export_state(fs, out, ex.name);
    std::ofstream js(out_path(out, ex.name + "-report.json"));
    js << report_json(rep);
  }
  return 0;
}

int run_modelmap(const std::string& rodfile, const GridArgs& ga,
                 const std::string& out) {
  const RodStructure rs = read_rod_file(rodfile);
  ModelMap mm(rs, {});
  double det_err = 0.0;
  const PolarGrid g = ga.grid();
  for (int i = 0; i < g.nr; i += 7)
    for (int j = 1; j < g.ntheta - 1; j += 7) {
      const WeylPoint p = g.point(i, j);
      const double want = std::pow(rs.beta_hat() * p.rho, 2);
      det_err = std::max(det_err,
                         std::abs(mm.gram(p).determinant() / want - 1.0));
    }
  std::printf("det defect %.3e over %dx%d sample\n", det_err, g.nr,
              g.ntheta);
  if (!out.empty()) {
    FieldState fs = sample_state(mm, g);
    write_field_csv(fs,
                    out_path(out, "modelmap-field.csv").string());
  }
  return 0;
}

int run_solve(const std::string& rodfile, const GridArgs& ga,
              const SolveArgs& sa, const std::string& out) {
  const RodStructure rs = read_rod_file(rodfile);
  FieldState fs = solve_harmonic_map(rs, ga.grid(), sa.options());
  std::printf("sweeps %d  defect %.3e  m %.9g  j %.9g\n", fs.sweeps,
              fs.history.empty() ? 0.0 : fs.history.back(), fs.m_fit,
              fs.j_fit);
  export_state(fs, out, "solve");
  return 0;
}

int run_invariants(const ExactArgs& ex, const std::string& rodfile,
                   const GridArgs& ga, const SolveArgs& sa,
                   const std::string& out, bool table) {
  InvariantsReport rep;
  if (!ex.name.empty()) {
    rep = exact_report(ex);
  } else {
    const RodStructure rs = read_rod_file(rodfile);
    FieldState fs = solve_harmonic_map(rs, ga.grid(), sa.options());
    rep = field_invariants(fs);
    export_state(fs, out, "invariants");
  }
  print_report(rep, table);
  if (!out.empty()) {
    std::ofstream js(out_path(out, "invariants-report.json"));
    js << report_json(rep);
  }
  return 0;
}

int check_line(const char* name, double value, double tol) {
  const bool ok = value < tol;
  std::printf("%-24s %11.3e  (tol %.1e)  %s\n", name, value, tol,
              ok ? "pass" : "FAIL");
  return ok ? 0 : 1;
}

int run_verify(const std::string& what, const ExactArgs& ex,
               const std::string& rodfile, const GridArgs& ga,
               const SolveArgs& sa, double check_tol, unsigned seed) {
  int failures = 0;

  if (what == "identities") {
    InvariantsReport rep;
    if (!ex.name.empty()) {
      rep = exact_report(ex);
    } else {
      const RodStructure rs = read_rod_file(rodfile);
      FieldState fs = solve_harmonic_map(rs, ga.grid(), sa.options());
      rep = field_invariants(fs);
    }
    const double tol = check_tol > 0 ? check_tol
                       : ex.name.empty() ? 1e-2
                                         : 1e-12;
    auto res = identity_residuals(rep);
    for (const auto& [key, val] : res)
      failures += check_line(key.c_str(), std::abs(val), tol);
  } else if (what == "curvature") {
    if (ex.name.empty())
      throw std::invalid_argument("verify curvature needs --exact");
    auto src = make_exact(ex);
    const double tol = check_tol > 0 ? check_tol : 1e-6;
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> ur(0.0, 1.0);
    const double zs = 1.0 + src->rods().max_abs_corner();
    double worst = 0.0;
    for (int n = 0; n < 100; ++n) {
      const double r = zs * (1.5 + 6.0 * ur(rng));
      const double th = pi * (0.1 + 0.8 * ur(rng));
      worst = std::max(worst,
                       ricci_residual(*src, from_polar(r, th)).max_abs());
    }
    failures += check_line("ricci-sup", worst, tol);
  } else if (what == "conical") {
    FieldState fs;
    if (!ex.name.empty()) {
      auto src = make_exact(ex);
      fs = sample_state(*src, ga.grid());
      const ConicalReport rep = conical_defects(fs);
      const double tol = check_tol > 0 ? check_tol : 1e-3;
      for (const auto& e : rep.entries) {
        char name[32];
        std::snprintf(name, sizeof name, "conical-rod-%d", e.rod);
        failures += check_line(name, std::abs(e.c - 1.0), tol);
      }
    } else {
      const RodStructure rs = read_rod_file(rodfile);
      fs = solve_harmonic_map(rs, ga.grid(), sa.options());
      compute_nu(fs);
      const ConicalReport rep = conical_defects(fs);
      const double tol = check_tol > 0 ? check_tol : 1e-2;
      for (const auto& e : rep.entries) {
        char name[32];
        std::snprintf(name, sizeof name, "conical-rod-%d", e.rod);
        failures += check_line(name, std::abs(e.c - 1.0), tol);
      }
    }
  } else {  // modelmap
    const RodStructure rs = read_rod_file(rodfile);
    ModelMap mm(rs, {});
    double det_err = 0.0;
    const PolarGrid g = ga.grid();
    for (int i = 0; i < g.nr; i += 5)
      for (int j = 1; j < g.ntheta - 1; j += 5) {
        const WeylPoint p = g.point(i, j);
        const double want = std::pow(rs.beta_hat() * p.rho, 2);
        det_err = std::max(det_err,
                           std::abs(mm.gram(p).determinant() / want - 1.0));
      }
    failures += check_line("det-defect", det_err, 1e-10);
    double angle = 0.0;
    for (int k = 0; k < rs.rods(); ++k) {
      const auto [lo, hi] = rs.rod_interval(k);
      const double span = std::max(1.0, rs.mean_finite_length());
      const double z = rs.finite_rod(k) ? 0.5 * (lo + hi)
                       : std::isfinite(hi) ? hi - span
                                           : lo + span;
      angle = std::max(angle, kernel_angle(mm, z));
    }
    failures += check_line("kernel-angle", angle, 1e-6);
    double ratio = 0.0;
    for (int k = 0; k < rs.rods(); ++k) {
      const TensionProbe tp = tension_boundedness_probe(mm, k);
      ratio = std::max(ratio, std::max(tp.ratio[0], tp.ratio[1]));
    }
    failures += check_line("tension-ratio", ratio, 2.0);
  }
  return failures == 0 ? 0 : 4;
}

int run_halfflat(const std::vector<double>& centers, double beta_hat) {
  const GibbonsHawkingData ghd = halfflat_build(centers, beta_hat);
  const HalfFlatReport rep = halfflat_obstruction(ghd);
  std::printf("fitted m = %.9g\n", rep.fitted_m);
  std::printf("chi jump = %.9g\n", rep.chi_jump);
  std::printf("verdict: %s\n", rep.af ? "AF" : "not AF");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AF toric instanton toolkit"};
  app.require_subcommand(1);

  GridArgs ga;
  SolveArgs sa;
  ExactArgs ex;
  std::string rodfile, out, what;
  std::vector<double> centers;
  double beta_hat = 1.0;
  double check_tol = 0.0;
  bool table = false;

  const auto add_grid = [&](CLI::App* sc) {
    sc->add_option("--nr", ga.nr, "radial nodes")->check(CLI::Range(32, 8192));
    sc->add_option("--ntheta", ga.ntheta, "angular nodes")
        ->check(CLI::Range(32, 8192));
    sc->add_option("--rmax", ga.rmax, "outer radius")
        ->check(CLI::PositiveNumber);
  };
  const auto add_solver = [&](CLI::App* sc) {
    sc->add_option("--tol", sa.tol, "sweep defect target")
        ->check(CLI::PositiveNumber);
    sc->add_option("--max-iters", sa.max_iters, "sweep budget")
        ->check(CLI::PositiveNumber);
    sc->add_option("--seed", sa.seed, "perturbation stream");
    sc->add_option("--perturb", sa.perturb,
                   "relative amplitude of initial noise");
  };
  const auto add_exact = [&](CLI::App* sc, bool positional) {
    auto* opt = positional ? sc->add_option("name", ex.name, "solution family")
                                 ->required()
                           : sc->add_option("--exact", ex.name,
                                            "closed-form solution family");
    opt->check(CLI::IsMember({"kerr", "chenteo", "flat"}));
    sc->add_option("--mu", ex.mu, "Kerr mass scale")
        ->check(CLI::PositiveNumber);
    sc->add_option("--alpha", ex.alpha, "Kerr rotation")
        ->check(CLI::NonNegativeNumber);
    sc->add_option("--xi", ex.xi, "Chen-Teo shape");
    sc->add_option("--kappa", ex.kappa, "Chen-Teo scale")
        ->check(CLI::PositiveNumber);
  };

  auto* sc_exact = app.add_subcommand("exact", "closed-form solution report");
  add_exact(sc_exact, true);
  add_grid(sc_exact);
  sc_exact->add_option("--out", out, "output directory");
  sc_exact->add_flag("--table", table, "human-readable report");

  auto* sc_model =
      app.add_subcommand("modelmap", "model metric for a rod structure");
  sc_model->add_option("--rods", rodfile, "rod structure file")->required();
  add_grid(sc_model);
  sc_model->add_option("--out", out, "output directory");

  auto* sc_solve = app.add_subcommand("solve", "relax the harmonic map");
  sc_solve->add_option("--rods", rodfile, "rod structure file")->required();
  add_grid(sc_solve);
  add_solver(sc_solve);
  sc_solve->add_option("--out", out, "output directory");

  auto* sc_verify = app.add_subcommand("verify", "run a named check suite");
  sc_verify
      ->add_option("what", what, "identities | curvature | conical | modelmap")
      ->required()
      ->check(CLI::IsMember({"identities", "curvature", "conical",
                             "modelmap"}));
  add_exact(sc_verify, false);
  sc_verify->add_option("--rods", rodfile, "rod structure file");
  add_grid(sc_verify);
  add_solver(sc_verify);
  sc_verify->add_option("--check-tol", check_tol,
                        "override the per-check threshold");

  auto* sc_inv =
      app.add_subcommand("invariants", "full invariants report");
  add_exact(sc_inv, false);
  sc_inv->add_option("--rods", rodfile, "rod structure file");
  add_grid(sc_inv);
  add_solver(sc_inv);
  sc_inv->add_option("--out", out, "output directory");
  sc_inv->add_flag("--table", table, "human-readable report");

  auto* sc_half =
      app.add_subcommand("halfflat", "Gibbons-Hawking obstruction probe");
  sc_half->add_option("--centers", centers, "nut positions on the axis")
      ->delimiter(',');
  sc_half->add_option("--beta-hat", beta_hat, "harmonic residue")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sc_exact->parsed()) return run_exact(ex, ga, out, table);
    if (sc_model->parsed()) return run_modelmap(rodfile, ga, out);
    if (sc_solve->parsed()) return run_solve(rodfile, ga, sa, out);
    if (sc_verify->parsed()) {
      if (ex.name.empty() && rodfile.empty())
        throw std::invalid_argument("verify needs --exact or --rods");
      return run_verify(what, ex, rodfile, ga, sa, check_tol, sa.seed);
    }
    if (sc_inv->parsed()) {
      if (ex.name.empty() && rodfile.empty())
        throw std::invalid_argument("invariants needs --exact or --rods");
      return run_invariants(ex, rodfile, ga, sa, out, table);
    }
    if (sc_half->parsed()) return run_halfflat(centers, beta_hat);
  } catch (const SolveError& e) {
    std::fprintf(stderr, "did not converge: %s\n", e.what());
    return 3;
  } catch (const RodFileError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 4;
  }
  return 0;
}
