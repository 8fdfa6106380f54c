#pragma once

#include <string>

#include "toric/report.hpp"
#include "toric/solver.hpp"

namespace toric {

// Grid export: CSV with header rho,z,V,omega,nu,W at 17 significant
// digits, nodes in row-major (i, j) order, plus a JSON sidecar
// <path>.json carrying the rod structure, sweep count and residual.
// W is reconstructed unless the state is static, where it is 0.
void write_field_csv(const FieldState& fs, const std::string& path);

// Rod structure files: JSON object with keys beta, omega,
// turning_points, rod_vectors. Throws RodFileError listing every
// schema violation found.
RodStructure read_rod_file(const std::string& path);
void write_rod_file(const RodStructure& rs, const std::string& path);

std::string report_json(const InvariantsReport& rep);
std::string report_table(const InvariantsReport& rep);

}  // namespace toric
