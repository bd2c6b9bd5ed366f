#pragma once

#include <string>
#include <vector>

#include "jcedkit/nadir_boundary.hpp"
#include "jcedkit/program.hpp"
#include "jcedkit/scenario.hpp"

namespace jced {

enum class ChanceKind { Freq, DibrUp, LineFlow };

const char* to_string(ChanceKind k);

// lhs . x >= rhs[i] must hold in scenario i.
struct ChanceRow {
  std::string name;
  Terms lhs;
  std::vector<double> rhs;
};

// Rows sharing one indicator family and one risk budget delta.
struct ChanceBlock {
  ChanceKind kind = ChanceKind::Freq;
  std::string family;  // indicator family tag, e.g. "sys", "W", "L"
  double delta = 0.0;
  std::vector<ChanceRow> rows;
  // Two-sided pairs (row index of A x >= -F + e, row index of -A x >= -F - e)
  // with the line capacity F, for the aggregated cuts.
  struct Pair {
    int low = 0;
    int up = 0;
    double capacity = 0.0;
  };
  std::vector<Pair> pairs;
};

// Column indices of every decision variable, in case device order.
struct VarMap {
  std::vector<int> p_g, r_up, r_dn, alpha;
  std::vector<std::vector<int>> fuel_seg;
  std::vector<int> p_w, H_w, D_w;
  std::vector<int> p_e, r_e_up, r_e_dn, p_loss, H_e, D_e;
};

enum class ModeKind { PoJced, FixJced, UpIced };

const char* to_string(ModeKind m);
ModeKind parse_mode(const std::string& s);

struct BuildMode {
  ModeKind kind = ModeKind::PoJced;
  InverterSettings fixed;  // FixJced only

  static BuildMode po() { return {}; }
  static BuildMode up() { return {ModeKind::UpIced, {}}; }
  static BuildMode fix(InverterSettings s) { return {ModeKind::FixJced, std::move(s)}; }
};

// The dispatch model before the chance constraints are reformulated:
// variables, objective, and deterministic rows live in `det`; chance-
// constrained rows are kept per block with their per-scenario right sides.
struct SymbolicModel {
  CanonicalProgram det;
  VarMap vars;
  std::vector<ChanceBlock> blocks;
  std::vector<std::string> warnings;
  BuildMode mode;
  PwlBoundary boundary;  // empty pieces when the nadir rows are not built
  DisturbanceQuantiles quantiles;
  double expected_abs_dp = 0.0;  // MW
  int fuel_segments = 3;
};

}  // namespace jced
