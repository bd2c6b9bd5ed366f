#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "jcedkit/program.hpp"
#include "jcedkit/symbolic_model.hpp"

namespace jced {

enum class ModelFormat { Mps, Lp };

ModelFormat parse_model_format(const std::string& s);

// Fixed-form MPS. Names longer than 8 characters (or containing blanks) are
// replaced by C%07d / R%07d codes and the originals listed in leading
// "* <code> <name>" comment lines, which read_mps uses to restore them. The
// objective constant is written as the negated RHS of the objective row.
std::string write_mps(const CanonicalProgram& p);
CanonicalProgram read_mps(const std::string& text, const std::string& source = "<string>");

// CPLEX-style LP text; the objective constant is written as a comment.
std::string write_lp(const CanonicalProgram& p);

void export_model(const CanonicalProgram& p, ModelFormat fmt, const std::filesystem::path& path);
CanonicalProgram import_mps(const std::filesystem::path& path);

// "<name> <value>" lines; optional "status <word>" and "objective <value>"
// lines; blank lines and lines starting with '#' are skipped.
struct SolutionFile {
  std::optional<std::string> status;
  std::optional<double> objective;
  std::map<std::string, double> values;
};

SolutionFile parse_solution(const std::string& text, const std::string& source = "<string>");
std::string write_solution(const CanonicalProgram& p, const std::vector<double>& x, const std::string& status,
                           double objective);

// Structured JSON dump of a symbolic model: variables, objective, rows,
// chance blocks with per-scenario right sides, and the nadir boundary.
std::string symbolic_to_json(const SymbolicModel& m, int indent = 1);

}  // namespace jced
