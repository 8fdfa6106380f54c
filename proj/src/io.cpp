#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "toric/invariants.hpp"
#include "toric/io.hpp"

namespace toric {

namespace {

using nlohmann::ordered_json;

std::string num17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

ordered_json rods_json(const RodStructure& rs) {
  ordered_json j;
  j["beta"] = rs.beta;
  j["omega"] = rs.omega;
  j["turning_points"] = rs.turning_points;
  auto& vecs = j["rod_vectors"] = ordered_json::array();
  for (const RodVector& v : rs.rod_vectors) vecs.push_back({v.v1, v.v2});
  return j;
}

std::string fmt(double x) {
  if (std::isnan(x)) return "-";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

}  // namespace

void write_field_csv(const FieldState& fs, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);

  const bool rotating = fs.omega.abs().maxCoeff() > 0.0;
  const Field W = rotating ? ernst_potential(fs) : zero_field(fs.grid);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  out << "rho,z,V,omega,nu,W\n";
  for (int i = 0; i < fs.grid.nr; ++i)
    for (int j = 0; j < fs.grid.ntheta; ++j) {
      const WeylPoint p = fs.grid.point(i, j);
      out << num17(p.rho) << ',' << num17(p.z) << ',' << num17(fs.V(i, j))
          << ',' << num17(fs.omega(i, j)) << ','
          << num17(fs.has_nu ? fs.nu(i, j) : nan) << ',' << num17(W(i, j))
          << '\n';
    }

  ordered_json side;
  side["rods"] = rods_json(fs.rs);
  side["grid"] = {{"nr", fs.grid.nr},
                  {"ntheta", fs.grid.ntheta},
                  {"rmax", fs.grid.rmax}};
  side["sweeps"] = fs.sweeps;
  side["residual"] = fs.residual_norm;
  side["m"] = fs.m_fit;
  side["j"] = fs.j_fit;
  std::ofstream sout(path + ".json");
  sout << side.dump(2) << '\n';
}

RodStructure read_rod_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw RodFileError(path + ": cannot open");

  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw RodFileError(path + ": " + e.what());
  }

  std::vector<std::string> bad;
  RodStructure rs;
  rs.turning_points.clear();
  rs.rod_vectors.clear();

  if (!j.is_object()) {
    throw RodFileError(path + ": top level is not an object");
  }
  if (!j.contains("beta") || !j["beta"].is_number())
    bad.push_back("beta: missing or not a number");
  else if ((rs.beta = j["beta"].get<double>()) <= 0)
    bad.push_back("beta: must be positive");
  if (!j.contains("omega") || !j["omega"].is_number())
    bad.push_back("omega: missing or not a number");
  else
    rs.omega = j["omega"].get<double>();

  if (!j.contains("turning_points") || !j["turning_points"].is_array()) {
    bad.push_back("turning_points: missing or not an array");
  } else {
    for (const auto& t : j["turning_points"]) {
      if (!t.is_number()) {
        bad.push_back("turning_points: non-numeric entry");
        break;
      }
      rs.turning_points.push_back(t.get<double>());
    }
    for (std::size_t k = 1; k < rs.turning_points.size(); ++k)
      if (!(rs.turning_points[k - 1] < rs.turning_points[k])) {
        bad.push_back("turning_points: not strictly increasing");
        break;
      }
  }

  if (!j.contains("rod_vectors") || !j["rod_vectors"].is_array()) {
    bad.push_back("rod_vectors: missing or not an array");
  } else {
    for (const auto& v : j["rod_vectors"]) {
      if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() ||
          !v[1].is_number_integer()) {
        bad.push_back("rod_vectors: entries must be integer pairs");
        break;
      }
      rs.rod_vectors.push_back({v[0].get<int>(), v[1].get<int>()});
    }
    if (rs.rod_vectors.size() != rs.turning_points.size() + 1)
      bad.push_back("rod_vectors: need one more vector than turning points");
    for (const RodVector& v : rs.rod_vectors)
      if (!coprime(v)) {
        bad.push_back("rod_vectors: entries must be nonzero and coprime");
        break;
      }
  }

  if (!bad.empty()) {
    std::string msg = path + ":";
    for (const std::string& b : bad) msg += "\n  " + b;
    throw RodFileError(msg);
  }
  return rs;
}

void write_rod_file(const RodStructure& rs, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << rods_json(rs).dump(2) << '\n';
}

std::string report_json(const InvariantsReport& rep) {
  ordered_json j;
  j["beta"] = rep.beta;
  j["omega"] = rep.omega;
  j["m"] = rep.m;
  j["j"] = rep.j;
  j["action"] = rep.action;
  j["action_bolt_sum"] = rep.action_bolt_sum;
  auto& rods = j["rods"] = ordered_json::array();
  for (const RodInvariants& ri : rep.rods) {
    ordered_json r;
    r["vector"] = {ri.vector.v1, ri.vector.v2};
    r["z_lo"] = ri.z_lo;
    r["z_hi"] = ri.z_hi;
    r["length"] = ri.length;
    r["area"] = ri.area;
    r["q_psi"] = ri.q_psi;
    r["q_chi"] = ri.q_chi;
    r["conical"] = ri.conical;
    rods.push_back(r);
  }
  auto& res = j["residuals"] = ordered_json::object();
  for (const auto& [key, val] : rep.residuals) res[key] = val;
  return j.dump(2) + "\n";
}

std::string report_table(const InvariantsReport& rep) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line,
                "beta %-14.9g omega %-14.9g m %-14.9g j %-14.9g\n", rep.beta,
                rep.omega, rep.m, rep.j);
  out << line;
  std::snprintf(line, sizeof line, "action %-14.9g bolt-sum %-14.9g\n",
                rep.action, rep.action_bolt_sum);
  out << line;
  out << "rod vector   interval                      length       area"
         "         q_psi        q_chi        conical\n";
  for (std::size_t k = 0; k < rep.rods.size(); ++k) {
    const RodInvariants& ri = rep.rods[k];
    char vec[24], span[64];
    std::snprintf(vec, sizeof vec, "(%d,%d)", ri.vector.v1, ri.vector.v2);
    std::snprintf(span, sizeof span, "[%s, %s]", fmt(ri.z_lo).c_str(),
                  fmt(ri.z_hi).c_str());
    std::snprintf(line, sizeof line,
                  "%3zu %-8s %-29s %-12s %-12s %-12s %-12s %-12s\n", k, vec,
                  span, fmt(ri.length).c_str(), fmt(ri.area).c_str(),
                  fmt(ri.q_psi).c_str(), fmt(ri.q_chi).c_str(),
                  fmt(ri.conical).c_str());
    out << line;
  }
  if (!rep.residuals.empty()) {
    out << "residuals\n";
    for (const auto& [key, val] : rep.residuals) {
      std::snprintf(line, sizeof line, "  %-18s % .3e\n", key.c_str(), val);
      out << line;
    }
  }
  return out.str();
}

}  // namespace toric
