#pragma once

#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace jced {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { Le, Ge, Eq };

struct Variable {
  std::string name;
  double lb = 0.0;
  double ub = kInf;
  bool is_integer = false;

  bool operator==(const Variable&) const = default;
};

struct Row {
  std::string name;
  Sense sense = Sense::Ge;
  double rhs = 0.0;
  std::string family;  // tag for reporting and infeasibility diagnosis

  bool operator==(const Row&) const = default;
};

struct Triplet {
  int row = 0;
  int col = 0;
  double val = 0.0;

  bool operator==(const Triplet&) const = default;
};

using Terms = std::vector<std::pair<int, double>>;

// Sparse linear (mixed-integer) minimization program. Rows and columns are
// appended; assemble() merges duplicate triplets and drops exact zeros.
class CanonicalProgram {
 public:
  std::string name = "jced";
  std::vector<Variable> vars;
  std::vector<double> obj;
  double obj_offset = 0.0;
  std::vector<Row> rows;
  std::vector<Triplet> triplets;

  int add_var(std::string name, double lb, double ub, double cost = 0.0, bool is_integer = false);
  int add_row(std::string name, Sense sense, double rhs, const Terms& terms, std::string family = {});
  void add_coef(int row, int col, double val) { triplets.push_back({row, col, val}); }

  int num_vars() const { return static_cast<int>(vars.size()); }
  int num_rows() const { return static_cast<int>(rows.size()); }
  int num_integers() const;
  std::size_t nnz() const { return triplets.size(); }

  // Sorts triplets by (row, col), sums duplicates, removes zeros.
  void assemble();
  bool assembled() const { return assembled_; }

  // Throws ValidationError on broken invariants (bounds, indices, finiteness).
  void validate() const;

  // Index by variable name; built lazily, throws on unknown names.
  int var_index(const std::string& name) const;

  double objective_value(const std::vector<double>& x) const;
  std::vector<double> row_activity(const std::vector<double>& x) const;

  // Largest absolute violation of any row or bound (and integrality if asked).
  double max_violation(const std::vector<double>& x, bool check_integrality, std::string* where = nullptr) const;

  // Per-family row counts, in first-appearance order.
  std::vector<std::pair<std::string, int>> family_counts() const;

 private:
  bool assembled_ = true;
  mutable std::map<std::string, int> name_index_;
};

}  // namespace jced
