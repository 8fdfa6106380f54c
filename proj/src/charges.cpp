#include <cmath>
#include <stdexcept>
#include <string>

#include "toric/analysis.hpp"
#include "toric/invariants.hpp"

namespace toric {

namespace {

struct TailFit {
  double lead = 0.0;  // coefficient of 1/r
  double sub = 0.0;   // coefficient of 1/r^2
  double rms = 0.0;
};

// Weighted least squares of y against a/r + b/r^2 over supplied rows.
class TailAccumulator {
 public:
  void add(double r, double y, double w) {
    const double f1 = 1.0 / r, f2 = f1 * f1;
    a11_ += w * f1 * f1;
    a12_ += w * f1 * f2;
    a22_ += w * f2 * f2;
    b1_ += w * f1 * y;
    b2_ += w * f2 * y;
    rows_.push_back({r, y, w});
  }

  TailFit solve() const {
    TailFit fit;
    const double det = a11_ * a22_ - a12_ * a12_;
    if (det == 0 || rows_.empty()) return fit;
    fit.lead = (b1_ * a22_ - b2_ * a12_) / det;
    fit.sub = (a11_ * b2_ - a12_ * b1_) / det;
    double acc = 0.0;
    for (const Row& row : rows_) {
      const double model = fit.lead / row.r + fit.sub / (row.r * row.r);
      acc += (row.y - model) * (row.y - model);
    }
    fit.rms = std::sqrt(acc / rows_.size());
    return fit;
  }

 private:
  struct Row {
    double r, y, w;
  };
  double a11_ = 0, a12_ = 0, a22_ = 0, b1_ = 0, b2_ = 0;
  std::vector<Row> rows_;
};

}  // namespace

AsymptoticFit fit_asymptotics(const FieldState& fs) {
  const PolarGrid& g = fs.grid;
  TailAccumulator av, aw;
  for (int i = 0; i < g.nr; ++i) {
    const double r = g.r(i);
    if (r < 0.5 * g.rmax) continue;
    for (int j = 1; j < g.ntheta - 1; ++j) {
      const double s2 = std::pow(std::sin(g.theta(j)), 2);
      av.add(r, 1.0 - fs.V(i, j), 1.0 / r);
      if (s2 > 0.05) aw.add(r, fs.omega(i, j) / s2, 1.0 / r);
    }
  }
  const TailFit fv = av.solve(), fw = aw.solve();

  AsymptoticFit out;
  out.m = 0.5 * fv.lead;
  out.j = 0.5 * fw.lead;
  out.v_misfit = fv.rms;
  out.omega_misfit = fw.rms;
  // Warn when the fitted subleading term competes with the leading one
  // at the inner edge of the band: the expansion has not settled.
  const double rb = 0.5 * g.rmax;
  const bool v_bad = std::abs(fv.sub) / rb > 0.25 * std::abs(fv.lead) + 1e-9;
  const bool w_bad = std::abs(fw.sub) / rb > 0.25 * std::abs(fw.lead) + 1e-9;
  out.truncation_warning = v_bad || w_bad;
  return out;
}

ChargePair charges(const YPotentialTrace& trace, const RodStructure& rs,
                   int rod, double tol) {
  if (!rs.finite_rod(rod))
    throw std::invalid_argument("charges live on finite rods");
  const Mat2& dy = trace.corner_differences.at(rod - 1);
  const Mat2 lad = adapted_basis(rs, rod).cast<double>();
  const Mat2 q = 2.0 * pi * lad.determinant() * (lad * dy);

  ChargePair out;
  out.q_psi = q(0, 0);
  out.q_chi = q(0, 1);
  out.kernel_defect = std::max(std::abs(q(1, 0)), std::abs(q(1, 1)));
  const double scale = 1.0 + std::max(std::abs(out.q_psi), std::abs(out.q_chi));
  if (out.kernel_defect > tol * scale)
    throw std::runtime_error("rod-direction row of the charge matrix is " +
                             std::to_string(out.kernel_defect) +
                             "; potentials and rod structure disagree");
  return out;
}

std::map<std::string, double> identity_residuals(const InvariantsReport& rep) {
  const double bh = rep.beta_hat();
  const double om = rep.omega;
  double sum_qpsi_v1 = 0.0, sum_qchi_v1 = 0.0;
  double smarr = 0.0, mass = 0.0;
  std::map<std::string, double> out;
  for (std::size_t k = 0; k < rep.rods.size(); ++k) {
    const RodInvariants& ri = rep.rods[k];
    if (!ri.finite()) continue;
    const double v1 = ri.vector.v1, v2 = ri.vector.v2;
    sum_qpsi_v1 += ri.q_psi * v1;
    sum_qchi_v1 += ri.q_chi * v1;
    smarr += ri.area - 0.5 * ri.q_chi * v2;
    mass += ri.area - 0.5 * ri.q_chi * (v2 + om * bh * v1);
    const double q_rod = v1 * ri.q_psi + v2 * ri.q_chi;
    out["rod-flux-" + std::to_string(k)] =
        q_rod - 2.0 * rep.beta * ri.length;
  }
  const double komar = rep.m - 2.0 * om * rep.j;
  out["angular-momentum"] = rep.j + sum_qchi_v1 / (16.0 * pi);
  out["komar-mass"] = komar - sum_qpsi_v1 / (4.0 * rep.beta);
  out["smarr"] = komar - smarr / (2.0 * rep.beta);
  out["mass-formula"] = rep.m - mass / (2.0 * rep.beta);
  return out;
}

ActionPair euclidean_action(InvariantsReport& rep) {
  ActionPair out;
  out.action = 0.5 * rep.beta * rep.m;
  out.bolt_sum = 0.0;
  const double bh = rep.beta_hat();
  for (const RodInvariants& ri : rep.rods) {
    if (!ri.finite()) continue;
    out.bolt_sum +=
        0.25 * ri.area -
        0.125 * ri.q_chi * (ri.vector.v2 + rep.omega * bh * ri.vector.v1);
  }
  rep.action = out.action;
  rep.action_bolt_sum = out.bolt_sum;
  return out;
}

InvariantsReport field_invariants(FieldState& fs) {
  const RodStructure& rs = fs.rs;
  InvariantsReport rep;
  rep.beta = rs.beta;
  rep.omega = rs.omega;

  const AsymptoticFit fit = fit_asymptotics(fs);
  rep.m = fit.m;
  rep.j = fit.j;

  if (!fs.has_nu) compute_nu(fs);
  const YPotentialTrace trace = compute_Y(fs);
  const ConicalReport cones = conical_defects(fs);

  for (int k = 0; k < rs.rods(); ++k) {
    RodInvariants ri;
    ri.vector = rs.rod_vectors[k];
    std::tie(ri.z_lo, ri.z_hi) = rs.rod_interval(k);
    ri.length = rs.rod_length(k);
    ri.conical = cones.entries.at(k).c;
    if (rs.finite_rod(k)) {
      const ChargePair q = charges(trace, rs, k);
      ri.q_psi = q.q_psi;
      ri.q_chi = q.q_chi;
      ri.area = bolt_geometry(fs, k).area;
    }
    rep.rods.push_back(ri);
  }
  rep.residuals = identity_residuals(rep);
  euclidean_action(rep);
  return rep;
}

}  // namespace toric
