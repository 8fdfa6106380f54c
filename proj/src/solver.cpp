#include "toric/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

#include <Eigen/Eigenvalues>

#include "toric/exact.hpp"
#include "toric/modelmap.hpp"

namespace toric {

namespace {

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("TORIC_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return std::min(n, 64);
  }
  const int hw = static_cast<int>(std::thread::hardware_concurrency());
  return std::clamp(hw, 1, 16);
}

// Static partition of [lo, hi) over worker threads; body(l, h, slot).
template <class F>
void parallel_range(int lo, int hi, int threads, const F& body) {
  const int n = hi - lo;
  if (threads <= 1 || n < 4 * threads) {
    body(lo, hi, 0);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  const int chunk = (n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const int l = lo + t * chunk, h = std::min(hi, l + chunk);
    if (l >= h) break;
    pool.emplace_back(body, l, h, t);
  }
  for (auto& th : pool) th.join();
}

enum class RodKind { phi, bolt, static_bolt };

struct AxisTag {
  int kind = 0;  // 0 phi, 1 bolt, 2 static, 3 corner
  double wval = 0.0;
};

RodKind classify(const RodStructure& rs, const RodVector& v) {
  if (v.v1 == 0) return RodKind::phi;
  const double bh = rs.beta_hat();
  const double t = v.v1 * bh * rs.omega + v.v2;
  const double scale = std::abs(v.v1) * bh * std::abs(rs.omega) +
                       std::abs(static_cast<double>(v.v2)) + 1.0;
  return std::abs(t) <= 1e-12 * scale ? RodKind::static_bolt : RodKind::bolt;
}

// Twist value forced on a rotating bolt axis: the kernel condition
// g.(p,q) -> 0 pins omega to -p bhat / (p bhat Omega + q).
double bolt_omega(const RodStructure& rs, const RodVector& v) {
  const double bh = rs.beta_hat();
  return -v.v1 * bh / (v.v1 * bh * rs.omega + v.v2);
}

struct Sim {
  PolarGrid g;
  RodStructure rs;
  int nr, nt, threads;
  double hr, ht, bh, relax;
  std::vector<double> r, sn, cs, ctn;
  Field a, w;  // unknowns: a = u - template, w = omega
  bool has_template = false;
  Field ut, ut_r, ut_th;
  std::vector<AxisTag> tag[2];  // columns j = 0 and j = nt-1
  std::vector<double> arow0, wrow0;
  std::vector<double> part;
  double m = 0.0, jm = 0.0;
  int arg_i = -1, arg_j = -1;
  bool arg_w = false;
  bool first_fit = true;

  explicit Sim(const RodStructure& rs_in, const PolarGrid& grid,
               const SolverOptions& opts)
      : g(grid), rs(rs_in) {
    nr = g.nr;
    nt = g.ntheta;
    hr = g.dr();
    ht = g.dtheta();
    bh = rs.beta_hat();
    // Near-optimal over-relaxation for the grid; overshooting the
    // optimum degrades linearly, undershooting quadratically.
    relax = opts.relax > 0.0
                ? opts.relax
                : 2.0 / (1.0 + std::sin(pi / std::max(nr, nt - 1)));
    threads = resolve_threads(opts.threads);
    r.resize(nr);
    for (int i = 0; i < nr; ++i) r[i] = g.r(i);
    sn.resize(nt);
    cs.resize(nt);
    ctn.resize(nt);
    for (int j = 0; j < nt; ++j) {
      sn[j] = std::sin(g.theta(j));
      cs[j] = std::cos(g.theta(j));
      ctn[j] = (j == 0 || j == nt - 1) ? 0.0 : cs[j] / sn[j];
    }
    a = zero_field(g);
    w = zero_field(g);
    arow0.resize(nt);
    wrow0.resize(nt);
    part.resize(threads);
    build_template();
    build_tags();
  }

  void build_template() {
    std::vector<std::array<double, 2>> segs;
    for (int k = 0; k < rs.rods(); ++k)
      if (rs.finite_rod(k) &&
          classify(rs, rs.rod_vectors[k]) == RodKind::static_bolt) {
        const auto iv = rs.rod_interval(k);
        segs.push_back({iv.first, iv.second});
      }
    has_template = !segs.empty();
    if (!has_template) return;
    ut = zero_field(g);
    ut_r = zero_field(g);
    ut_th = zero_field(g);
    for (int j = 0; j < nt; ++j)
      for (int i = 0; i < nr; ++i) {
        const WeylPoint p = g.point(i, j);
        double val = 0.0, grho = 0.0, gz = 0.0;
        for (const auto& s : segs) {
          val += rod_log_potential(p, s[0], s[1]);
          if (j > 0 && j < nt - 1) {
            const Vec2 gr = rod_log_potential_grad(p, s[0], s[1]);
            grho += gr[0];
            gz += gr[1];
          }
        }
        ut(i, j) = val;
        ut_r(i, j) = sn[j] * grho + cs[j] * gz;
        ut_th(i, j) = r[i] * (cs[j] * grho - sn[j] * gz);
      }
  }

  void build_tags() {
    for (int side = 0; side < 2; ++side) {
      tag[side].resize(nr);
      const double sgn = side == 0 ? 1.0 : -1.0;
      for (int i = 0; i < nr; ++i) {
        const double z = sgn * r[i];
        const RodVector v = rs.rod_vectors[rs.rod_at(z)];
        AxisTag t;
        switch (classify(rs, v)) {
          case RodKind::phi:
            t.kind = 0;
            break;
          case RodKind::bolt:
            t.kind = 1;
            t.wval = bolt_omega(rs, v);
            break;
          case RodKind::static_bolt:
            t.kind = 2;
            break;
        }
        tag[side][i] = t;
      }
    }
    // The axis node nearest each turning point satisfies neither
    // neighbouring condition cleanly; close it by radial
    // extrapolation instead.
    for (double zc : rs.turning_points) {
      const int side = zc >= 0.0 ? 0 : 1;
      const int i = std::clamp(
          static_cast<int>(std::llround(std::abs(zc) / hr - 0.5)), 0, nr - 3);
      tag[side][i].kind = 3;
      if (std::abs(zc) < hr) tag[1 - side][i].kind = 3;
    }
  }

  double u_total(int i, int j) const {
    return a(i, j) + (has_template ? ut(i, j) : 0.0);
  }

  void close_axis() {
    for (int side = 0; side < 2; ++side) {
      const int col = side == 0 ? 0 : nt - 1;
      const int j1 = side == 0 ? 1 : nt - 2;
      const int j2 = side == 0 ? 2 : nt - 3;
      for (int i = 0; i <= nr - 2; ++i) {
        const AxisTag& t = tag[side][i];
        if (t.kind == 3) continue;
        a(i, col) = (4.0 * a(i, j1) - a(i, j2)) / 3.0;
        if (t.kind == 0)
          w(i, col) = 0.0;
        else if (t.kind == 1)
          w(i, col) = t.wval;
        else
          w(i, col) = (4.0 * w(i, j1) - w(i, j2)) / 3.0;
      }
      // Corner nodes sit on a log singularity of u; a damped update
      // keeps the lagged closure from limit-cycling with the interior.
      for (int i = 0; i <= nr - 2; ++i) {
        if (tag[side][i].kind != 3) continue;
        const double ea = (4.0 * a(i + 1, col) - a(i + 2, col)) / 3.0;
        const double ew = (4.0 * w(i + 1, col) - w(i + 2, col)) / 3.0;
        a(i, col) += 0.5 * (ea - a(i, col));
        w(i, col) += 0.5 * (ew - w(i, col));
      }
    }
  }

  // Far-field parameters from a band average and the outer Dirichlet
  // ring they imply.  The estimates are relaxed toward the band
  // average: jumping the ring re-excites the nodes next to it.
  void refit_outer() {
    double sm = 0.0, sj = 0.0;
    long cm = 0, cj = 0;
    for (int i = 0; i <= nr - 2; ++i) {
      if (r[i] < 0.70 * g.rmax) continue;
      for (int j = 1; j <= nt - 2; ++j) {
        const double V = std::exp(u_total(i, j));
        sm += r[i] * (1.0 - V) / 2.0;
        ++cm;
        const double s2 = sn[j] * sn[j];
        if (s2 > 0.1) {
          sj += w(i, j) * r[i] / (2.0 * s2);
          ++cj;
        }
      }
    }
    if (cm > 0) m = first_fit ? sm / cm : m + 0.5 * (sm / cm - m);
    if (cj > 0) jm = first_fit ? sj / cj : jm + 0.5 * (sj / cj - jm);
    first_fit = false;
    const double rout = r[nr - 1];
    const double arg = std::max(1.0 - 2.0 * m / rout, 0.05);
    for (int j = 0; j < nt; ++j) {
      a(nr - 1, j) =
          std::log(arg) - (has_template ? ut(nr - 1, j) : 0.0);
      w(nr - 1, j) = 2.0 * jm * sn[j] * sn[j] / rout;
    }
  }

  // One red-black half sweep; returns the max pre-update defect.
  // Updates are clamped per node: the exp(2u) coupling turns an
  // overshoot into a runaway within a few sweeps otherwise.
  double pass(int color, double relax_now) {
    for (int j = 0; j < nt; ++j) {
      arow0[j] = a(0, j);
      wrow0[j] = w(0, j);
    }
    std::fill(part.begin(), part.end(), 0.0);
    const double ihr2 = 1.0 / (hr * hr), iht2 = 1.0 / (ht * ht);
    parallel_range(1, nt - 1, threads, [&](int jlo, int jhi, int slot) {
      double local = 0.0;
      for (int j = jlo; j < jhi; ++j) {
        const double snj = sn[j], ctj = ctn[j];
        for (int i = (color + j) & 1; i <= nr - 2; i += 2) {
          const double ri = r[i], iri2 = 1.0 / (ri * ri);
          const double aC = a(i, j), wC = w(i, j);
          const double aE = a(i + 1, j), wE = w(i + 1, j);
          const double aW = i == 0 ? arow0[nt - 1 - j] : a(i - 1, j);
          const double wW = i == 0 ? wrow0[nt - 1 - j] : w(i - 1, j);
          const double aN = a(i, j + 1), wN = w(i, j + 1);
          const double aS = a(i, j - 1), wS = w(i, j - 1);

          double u_r = (aE - aW) / (2.0 * hr);
          double u_t = (aN - aS) / (2.0 * ht);
          double uval = aC;
          if (has_template) {
            u_r += ut_r(i, j);
            u_t += ut_th(i, j);
            uval += ut(i, j);
          }
          const double w_r = (wE - wW) / (2.0 * hr);
          const double w_t = (wN - wS) / (2.0 * ht);

          const double rho2 = ri * ri * snj * snj;
          const double rhs = std::exp(2.0 * uval) / rho2 *
                             (w_r * w_r + w_t * w_t * iri2);

          const double crp = ihr2 + 1.0 / (ri * hr);
          const double crm = ihr2 - 1.0 / (ri * hr);
          const double ctp = (iht2 + ctj / (2.0 * ht)) * iri2;
          const double ctm = (iht2 - ctj / (2.0 * ht)) * iri2;
          const double diag = -2.0 * ihr2 - 2.0 * iht2 * iri2;
          // The rhs enters the local step implicitly (d rhs/du = 2 rhs),
          // a Newton step on the node equation: near rotating-bolt
          // corners rhs is large and the explicit update limit-cycles.
          const double diag_a = diag - 2.0 * rhs;
          const double da =
              crp * aE + crm * aW + ctp * aN + ctm * aS + diag * aC - rhs;
          a(i, j) = aC + std::clamp(-relax_now * da / diag_a, -0.5, 0.5);

          const double qrp = ihr2 + u_r / hr;
          const double qrm = ihr2 - u_r / hr;
          const double qcf = (2.0 * u_t - ctj) / (2.0 * ht);
          const double qtp = (iht2 + qcf) * iri2;
          const double qtm = (iht2 - qcf) * iri2;
          const double dw =
              qrp * wE + qrm * wW + qtp * wN + qtm * wS + diag * wC;
          w(i, j) = wC + std::clamp(-relax_now * dw / diag, -0.5, 0.5);

          // Defect in field units; the raw stencil residual scales
          // like 1/r^2 near the origin and would mask convergence.
          const double dloc = std::max(std::abs(da / diag_a), std::abs(dw / diag));
          if (dloc > local) {
            local = dloc;
            arg_i = i;
            arg_j = j;
            arg_w = std::abs(dw / diag) > std::abs(da / diag);
          }
        }
      }
      part[slot] = std::max(part[slot], local);
    });
    return *std::max_element(part.begin(), part.end());
  }
};

void fill_from_source(Sim& sim, const GramSource& src) {
  parallel_range(1, sim.nt - 1, sim.threads, [&](int jlo, int jhi, int) {
    for (int j = jlo; j < jhi; ++j)
      for (int i = 0; i < sim.nr; ++i) {
        const FieldSample s = block_fields(src, sim.g.point(i, j));
        sim.a(i, j) =
            std::log(s.V) - (sim.has_template ? sim.ut(i, j) : 0.0);
        sim.w(i, j) = s.omega;
      }
  });
}

}  // namespace

FieldState sample_state(const GramSource& src, const PolarGrid& grid) {
  FieldState fs;
  fs.grid = grid;
  fs.rs = src.rods();
  fs.u = zero_field(grid);
  fs.omega = zero_field(grid);
  fs.nu = zero_field(grid);
  fs.source = &src;
  const int nr = grid.nr, nt = grid.ntheta;
  for (int j = 1; j <= nt - 2; ++j)
    for (int i = 0; i < nr; ++i) {
      const FieldSample s = block_fields(src, grid.point(i, j));
      fs.u(i, j) = std::log(s.V);
      fs.omega(i, j) = s.omega;
    }
  // Axis rows: evaluate where the source allows it, otherwise close
  // with the rod conditions.
  for (int side = 0; side < 2; ++side) {
    const int col = side == 0 ? 0 : nt - 1;
    const int j1 = side == 0 ? 1 : nt - 2;
    const int j2 = side == 0 ? 2 : nt - 3;
    const double sgn = side == 0 ? 1.0 : -1.0;
    for (int i = 0; i < nr; ++i) {
      const double z = sgn * grid.r(i);
      bool done = false;
      try {
        const FieldSample s = block_fields(src, WeylPoint{0.0, z});
        if (std::isfinite(s.omega) && (std::isfinite(s.V) || s.V == 0.0)) {
          fs.u(i, col) = std::log(s.V);
          fs.omega(i, col) = s.omega;
          done = true;
        }
      } catch (const std::exception&) {
      }
      if (!done) {
        const RodVector v = fs.rs.rod_vectors[fs.rs.rod_at(z)];
        fs.u(i, col) = (4.0 * fs.u(i, j1) - fs.u(i, j2)) / 3.0;
        switch (classify(fs.rs, v)) {
          case RodKind::phi:
            fs.omega(i, col) = 0.0;
            break;
          case RodKind::bolt:
            fs.omega(i, col) = bolt_omega(fs.rs, v);
            break;
          case RodKind::static_bolt:
            fs.omega(i, col) =
                (4.0 * fs.omega(i, j1) - fs.omega(i, j2)) / 3.0;
            break;
        }
      }
    }
  }
  return fs;
}

FieldState solve_harmonic_map(const RodStructure& rs, const PolarGrid& grid,
                              SolverOptions opts, const GramSource* initial) {
  {
    const auto fails = admissibility_failures(rs);
    if (!fails.empty()) {
      std::ostringstream msg;
      msg << "rod structure not admissible:";
      for (const auto& f : fails) msg << " " << f << ";";
      throw std::invalid_argument(msg.str());
    }
  }
  if (!asymptotically_flat(rs))
    throw std::invalid_argument(
        "solver needs an asymptotically flat rod structure");
  if (grid.rmax < 2.0 * rs.max_abs_corner())
    throw std::invalid_argument("outer radius too small for the rods");
  for (std::size_t k = 0; k + 1 < rs.rod_vectors.size(); ++k)
    if (k > 0 && rs.rod_length(k) < 16.0 * grid.dr())
      throw std::invalid_argument(
          "grid does not resolve a finite rod with 16 axis nodes");

  Sim sim(rs, grid, opts);

  std::optional<ModelMap> mm;
  const GramSource* init = initial;
  if (!init) {
    mm.emplace(rs);
    init = &*mm;
  }
  fill_from_source(sim, *init);

  if (opts.perturb > 0.0) {
    std::mt19937 gen(opts.seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    double wscale = 0.0;
    for (int j = 1; j <= sim.nt - 2; ++j)
      for (int i = 0; i <= sim.nr - 2; ++i)
        wscale = std::max(wscale, std::abs(sim.w(i, j)));
    for (int j = 1; j <= sim.nt - 2; ++j)
      for (int i = 0; i <= sim.nr - 2; ++i) {
        sim.a(i, j) += opts.perturb * uni(gen);
        if (wscale > 0.0) sim.w(i, j) += opts.perturb * wscale * uni(gen);
      }
  }

  sim.close_axis();

  std::vector<double> history;
  history.reserve(std::min(opts.max_iters, 100000));
  bool converged = false;
  int sweeps = 0;
  // Plain Gauss-Seidel until the nonlinear terms have settled, then
  // over-relax; starting over-relaxed from an O(1) defect diverges.
  double relax_now = 1.0;
  for (int it = 0; it < opts.max_iters; ++it) {
    if (it % opts.fit_interval == 0) sim.refit_outer();
    const double d1 = sim.pass(0, relax_now);
    const double d2 = sim.pass(1, relax_now);
    sim.close_axis();
    const double defect = std::max(d1, d2);
    relax_now = defect < 1e-3 ? sim.relax : 1.0;
    if (std::getenv("TORIC_TRACE") && it % 500 == 0)
      std::fprintf(stderr, "it %6d defect %.3e at (%d,%d) %s relax %.3f\n",
                   it, defect, sim.arg_i, sim.arg_j, sim.arg_w ? "w" : "a",
                   relax_now);
    history.push_back(defect);
    if (!(defect < 1e30))
      throw SolveError("relaxation diverged (non-finite defect)",
                       std::move(history));
    if (defect < opts.tol) {
      converged = true;
      sweeps = it == 0 ? 0 : it + 1;
      break;
    }
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "no convergence after " << opts.max_iters
        << " sweeps; defect " << history.back();
    throw SolveError(msg.str(), std::move(history));
  }

  FieldState fs;
  fs.grid = grid;
  fs.rs = rs;
  fs.u = sim.has_template ? Field(sim.a + sim.ut) : sim.a;
  fs.omega = sim.w;
  fs.nu = zero_field(grid);
  fs.sweeps = sweeps;
  fs.residual_norm = history.empty() ? 0.0 : history.back();
  fs.history = std::move(history);
  fs.m_fit = sim.m;
  fs.j_fit = sim.jm;
  return fs;
}

void weyl_jacobians(const FieldState& fs, int i, int j, Mat2& j_rho,
                    Mat2& j_z) {
  const PolarGrid& g = fs.grid;
  const int nr = g.nr, nt = g.ntheta;
  const double hr = g.dr(), ht = g.dtheta();
  const double th = g.theta(j), s = std::sin(th), c = std::cos(th);
  const double ri = g.r(i);

  const auto radial = [&](const Field& f) {
    if (i == 0) return (f(1, j) - f(0, nt - 1 - j)) / (2.0 * hr);
    if (i == nr - 1)
      return (3.0 * f(i, j) - 4.0 * f(i - 1, j) + f(i - 2, j)) / (2.0 * hr);
    return (f(i + 1, j) - f(i - 1, j)) / (2.0 * hr);
  };
  // Axis rows can hold limits (even -inf on static rods), so the
  // first interior rows difference one-sidedly away from them.
  const auto angular = [&](const Field& f) {
    if (j == 1)
      return (-3.0 * f(i, 1) + 4.0 * f(i, 2) - f(i, 3)) / (2.0 * ht);
    if (j == nt - 2)
      return (3.0 * f(i, j) - 4.0 * f(i, j - 1) + f(i, j - 2)) / (2.0 * ht);
    return (f(i, j + 1) - f(i, j - 1)) / (2.0 * ht);
  };

  const double u_r = radial(fs.u), u_th = angular(fs.u);
  const double w_r = radial(fs.omega), w_th = angular(fs.omega);
  const double u_rho = s * u_r + c / ri * u_th;
  const double u_z = c * u_r - s / ri * u_th;
  const double om_rho = s * w_r + c / ri * w_th;
  const double om_z = c * w_r - s / ri * w_th;

  const double rho = ri * s;
  const double V = std::exp(fs.u(i, j));
  const double om = fs.omega(i, j);
  const double s_rho = V * V * om_rho / (rho * rho);
  const double s_z = V * V * om_z / (rho * rho);

  // J = g^{-1} dg for g = [[V, V om], [V om, rho^2/V + V om^2]].
  const auto assemble = [&](double du, double dom, double sab,
                            double drho) {
    Mat2 m;
    m(0, 0) = du - om * sab;
    m(1, 0) = sab;
    m(0, 1) = 2.0 * om * du - om * om * sab - 2.0 * om * drho / rho + dom;
    m(1, 1) = om * sab + 2.0 * drho / rho - du;
    return m;
  };
  j_rho = assemble(u_rho, om_rho, s_rho, 1.0);
  j_z = assemble(u_z, om_z, s_z, 0.0);
}

double residual(const FieldState& fs) {
  const PolarGrid& g = fs.grid;
  const int nr = g.nr, nt = g.ntheta;
  const double hr = g.dr(), ht = g.dtheta();
  double worst = 0.0;
  std::vector<Mat2> jr(nr * nt), jz(nr * nt);
  std::vector<char> have(nr * nt, 0);
  const auto at = [&](int i, int j) -> std::pair<const Mat2&, const Mat2&> {
    const int idx = i + nr * j;
    if (!have[idx]) {
      weyl_jacobians(fs, i, j, jr[idx], jz[idx]);
      const double rho = g.r(i) * std::sin(g.theta(j));
      jr[idx] *= rho;
      jz[idx] *= rho;
      have[idx] = 1;
    }
    return {jr[idx], jz[idx]};
  };
  for (int j = 2; j <= nt - 3; ++j) {
    const double th = g.theta(j), s = std::sin(th), c = std::cos(th);
    for (int i = 1; i <= nr - 3; ++i) {
      const double ri = g.r(i);
      const auto [xe, ye] = at(i + 1, j);
      const auto [xw, yw] = at(i - 1, j);
      const auto [xn, yn] = at(i, j + 1);
      const auto [xs, ys] = at(i, j - 1);
      const Mat2 dx_dr = (xe - xw) / (2.0 * hr);
      const Mat2 dx_dt = (xn - xs) / (2.0 * ht);
      const Mat2 dy_dr = (ye - yw) / (2.0 * hr);
      const Mat2 dy_dt = (yn - ys) / (2.0 * ht);
      const Mat2 div = s * dx_dr + c / ri * dx_dt  // d_rho (rho J_rho)
                       + c * dy_dr - s / ri * dy_dt;
      worst = std::max(worst, div.cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

namespace {

// nu gradient through traces of J products; valid in any constant
// conjugation of the Gram matrix.
Vec2 nu_gradient_from(const Mat2& j_rho, const Mat2& j_z, double rho) {
  const double t_rr = (j_rho * j_rho).trace();
  const double t_zz = (j_z * j_z).trace();
  const double t_rz = (j_rho * j_z).trace();
  return {-1.0 / (2.0 * rho) + rho / 8.0 * (t_rr - t_zz),
          rho / 4.0 * t_rz};
}

Vec2 source_nu_gradient(const GramSource& src, const WeylPoint& p) {
  const double h = 1e-5 * (1.0 + p.r());
  const auto jac = [&](double drho, double dz) {
    const WeylPoint pp{p.rho + h * drho, p.z + h * dz};
    const WeylPoint pm{p.rho - h * drho, p.z - h * dz};
    const Mat2 dg = (src.gram(pp) - src.gram(pm)) / (2.0 * h);
    return Mat2(src.gram(p).inverse() * dg);
  };
  return nu_gradient_from(jac(1.0, 0.0), jac(0.0, 1.0), p.rho);
}

}  // namespace

void compute_nu(FieldState& fs) {
  const PolarGrid& g = fs.grid;
  const int nr = g.nr, nt = g.ntheta;
  fs.nu = zero_field(g);
  const bool closed = fs.source != nullptr;
  double m_seed = 0.0;
  if (!closed || !fs.source->has_nu()) m_seed = fit_far_field(fs).m;

  const double rout = g.r(nr - 1);
  for (int j = 1; j <= nt - 2; ++j) {
    const double th = g.theta(j), s = std::sin(th), c = std::cos(th);
    double val;
    if (closed && fs.source->has_nu())
      val = fs.source->nu(from_polar(rout, th));
    else
      val = m_seed / rout;
    fs.nu(nr - 1, j) = val;
    if (closed) {
      const auto integrand = [&](double rr) {
        const Vec2 dn = source_nu_gradient(*fs.source, from_polar(rr, th));
        return s * dn[0] + c * dn[1];
      };
      for (int i = nr - 2; i >= 0; --i) {
        val -= integrate(integrand, g.r(i), g.r(i + 1), 1e-12);
        fs.nu(i, j) = val;
      }
    } else {
      double f_hi;
      {
        Mat2 jr, jz;
        weyl_jacobians(fs, nr - 1, j, jr, jz);
        const Vec2 dn = nu_gradient_from(jr, jz, rout * s);
        f_hi = s * dn[0] + c * dn[1];
      }
      for (int i = nr - 2; i >= 0; --i) {
        Mat2 jr, jz;
        weyl_jacobians(fs, i, j, jr, jz);
        const Vec2 dn = nu_gradient_from(jr, jz, g.r(i) * s);
        const double f_lo = s * dn[0] + c * dn[1];
        val -= 0.5 * g.dr() * (f_lo + f_hi);
        fs.nu(i, j) = val;
        f_hi = f_lo;
      }
    }
  }
  for (int i = 0; i < nr; ++i) {
    fs.nu(i, 0) = (4.0 * fs.nu(i, 1) - fs.nu(i, 2)) / 3.0;
    fs.nu(i, nt - 1) = (4.0 * fs.nu(i, nt - 2) - fs.nu(i, nt - 3)) / 3.0;
  }
  fs.has_nu = true;
}

namespace {

bool same_structure(const RodStructure& a, const RodStructure& b) {
  if (a.turning_points.size() != b.turning_points.size()) return false;
  if (a.rod_vectors.size() != b.rod_vectors.size()) return false;
  for (std::size_t k = 0; k < a.turning_points.size(); ++k)
    if (std::abs(a.turning_points[k] - b.turning_points[k]) > 1e-12)
      return false;
  for (std::size_t k = 0; k < a.rod_vectors.size(); ++k)
    if (a.rod_vectors[k].v1 != b.rod_vectors[k].v1 ||
        a.rod_vectors[k].v2 != b.rod_vectors[k].v2)
      return false;
  return std::abs(a.omega - b.omega) <= 1e-12 &&
         std::abs(a.beta - b.beta) <= 1e-12 * a.beta;
}

Mat2 tauphi_at(const FieldState& fs, int i, int j) {
  const double rho = fs.grid.r(i) * std::sin(fs.grid.theta(j));
  return tauphi_gram(fs.V(i, j), fs.omega(i, j), rho);
}

}  // namespace

MazurReport mazur_distance(const FieldState& fa, const FieldState& fb) {
  const PolarGrid& g = fa.grid;
  if (g.nr != fb.grid.nr || g.ntheta != fb.grid.ntheta ||
      std::abs(g.rmax - fb.grid.rmax) > 1e-12)
    throw std::invalid_argument("mazur: states on different grids");
  if (!same_structure(fa.rs, fb.rs))
    throw std::invalid_argument(
        "mazur: rod structures differ (Tr Psi diverges on the axis)");

  const int nr = g.nr, nt = g.ntheta;
  MazurReport rep;
  rep.tr_psi = zero_field(g);
  for (int j = 1; j <= nt - 2; ++j) {
    const double s = std::sin(g.theta(j));
    for (int i = 0; i < nr; ++i) {
      const double rho = g.r(i) * s;
      const double V = fa.V(i, j), Vt = fb.V(i, j);
      const double dw = fa.omega(i, j) - fb.omega(i, j);
      const double tr =
          (V - Vt) * (V - Vt) / (V * Vt) + V * Vt * dw * dw / (rho * rho);
      rep.tr_psi(i, j) = tr;
      rep.sup = std::max(rep.sup, tr);
    }
  }
  for (int i = 0; i < nr; ++i) {
    rep.tr_psi(i, 0) =
        std::max(0.0, (4.0 * rep.tr_psi(i, 1) - rep.tr_psi(i, 2)) / 3.0);
    rep.tr_psi(i, nt - 1) = std::max(
        0.0, (4.0 * rep.tr_psi(i, nt - 2) - rep.tr_psi(i, nt - 3)) / 3.0);
  }

  // Outer-arc flux of rho grad Tr Psi, n = d_r, line measure r dtheta.
  const double hr = g.dr(), ht = g.dtheta();
  const double rout = g.r(nr - 1);
  double flux = 0.0;
  for (int j = 1; j <= nt - 2; ++j) {
    const double s = std::sin(g.theta(j));
    const double dT = (3.0 * rep.tr_psi(nr - 1, j) -
                       4.0 * rep.tr_psi(nr - 2, j) +
                       rep.tr_psi(nr - 3, j)) /
                      (2.0 * hr);
    const double wgt = (j == 1 || j == nt - 2) ? 0.5 : 1.0;
    flux += wgt * rout * s * dT * rout * ht;
  }
  rep.outer_arc = flux;

  // Bulk density rho Tr(N^T N) with N = Sb^T (Jb - Ja) Sa^{-T}.
  double bulk = 0.0;
  double min_density = 0.0;
  for (int j = 1; j <= nt - 2; ++j) {
    const double s = std::sin(g.theta(j));
    for (int i = 0; i <= nr - 2; ++i) {
      const double rho = g.r(i) * s;
      Mat2 jar, jaz, jbr, jbz;
      weyl_jacobians(fa, i, j, jar, jaz);
      weyl_jacobians(fb, i, j, jbr, jbz);
      Eigen::SelfAdjointEigenSolver<Mat2> esa(tauphi_at(fa, i, j));
      Eigen::SelfAdjointEigenSolver<Mat2> esb(tauphi_at(fb, i, j));
      const Mat2 sa_inv_t = esa.operatorInverseSqrt();
      const Mat2 sb_t = esb.operatorSqrt();
      const Mat2 n_rho = sb_t * (jbr - jar) * sa_inv_t;
      const Mat2 n_z = sb_t * (jbz - jaz) * sa_inv_t;
      const double dens =
          rho * ((n_rho.transpose() * n_rho).trace() +
                 (n_z.transpose() * n_z).trace());
      min_density = std::min(min_density, dens);
      bulk += dens * g.r(i) * hr * ht;
    }
  }
  rep.bulk = bulk;
  rep.min_density = min_density;
  return rep;
}

FarFieldFit fit_far_field(const FieldState& fs) {
  const PolarGrid& g = fs.grid;
  const int nr = g.nr, nt = g.ntheta;
  // Weighted least squares of 1 - V against 2m/r + c/r^2 and of omega
  // against 2j sin^2/r + d sin^2/r^2, over the outer half band.
  Eigen::Matrix2d am = Eigen::Matrix2d::Zero(), aj = Eigen::Matrix2d::Zero();
  Eigen::Vector2d bm = Eigen::Vector2d::Zero(), bj = Eigen::Vector2d::Zero();
  for (int i = 0; i < nr; ++i) {
    const double r = g.r(i);
    if (r < 0.5 * g.rmax) continue;
    const double wgt = 1.0 / r;
    for (int j = 1; j <= nt - 2; ++j) {
      const double s2 = std::sin(g.theta(j)) * std::sin(g.theta(j));
      {
        const Eigen::Vector2d phi(1.0 / r, 1.0 / (r * r));
        am += wgt * phi * phi.transpose();
        bm += wgt * phi * (1.0 - fs.V(i, j));
      }
      if (s2 > 0.05) {
        const Eigen::Vector2d phi(s2 / r, s2 / (r * r));
        aj += wgt * phi * phi.transpose();
        bj += wgt * phi * fs.omega(i, j);
      }
    }
  }
  FarFieldFit fit;
  const Eigen::Vector2d pm = am.ldlt().solve(bm);
  const Eigen::Vector2d pj = aj.ldlt().solve(bj);
  fit.m = pm[0] / 2.0;
  fit.j = pj[0] / 2.0;
  return fit;
}

double loop_closure_defect(const FieldState& fs, double r_min) {
  const PolarGrid& g = fs.grid;
  const int nr = g.nr, nt = g.ntheta;
  if (r_min <= 0.0) r_min = 0.25 * g.rmax;

  // 1-form samples at plaquette corners.
  const auto one_form = [&](int i, int j) -> Vec2 {
    const WeylPoint p = g.point(i, j);
    if (fs.source) return source_nu_gradient(*fs.source, p);
    Mat2 jr, jz;
    weyl_jacobians(fs, i, j, jr, jz);
    return nu_gradient_from(jr, jz, p.rho);
  };

  double worst = 0.0;
  for (int j = 1; j <= nt - 3; ++j) {
    for (int i = 0; i <= nr - 2; ++i) {
      if (g.r(i) < r_min) continue;
      const std::array<std::pair<int, int>, 4> c = {
          std::pair{i, j}, {i + 1, j}, {i + 1, j + 1}, {i, j + 1}};
      double circ = 0.0;
      for (int e = 0; e < 4; ++e) {
        const auto [i0, j0] = c[e];
        const auto [i1, j1] = c[(e + 1) % 4];
        const WeylPoint p0 = g.point(i0, j0), p1 = g.point(i1, j1);
        const Vec2 f0 = one_form(i0, j0), f1 = one_form(i1, j1);
        circ += 0.5 * ((f0[0] + f1[0]) * (p1.rho - p0.rho) +
                       (f0[1] + f1[1]) * (p1.z - p0.z));
      }
      worst = std::max(worst, std::abs(circ));
    }
  }
  return worst;
}

}  // namespace toric
