#include "jcedkit/program.hpp"

#include <algorithm>
#include <cmath>

#include "jcedkit/error.hpp"

namespace jced {

int CanonicalProgram::add_var(std::string n, double lb, double ub, double cost, bool is_integer) {
  vars.push_back({std::move(n), lb, ub, is_integer});
  obj.push_back(cost);
  name_index_.clear();
  return static_cast<int>(vars.size()) - 1;
}

int CanonicalProgram::add_row(std::string n, Sense sense, double rhs, const Terms& terms, std::string family) {
  const int r = static_cast<int>(rows.size());
  rows.push_back({std::move(n), sense, rhs, std::move(family)});
  for (const auto& [col, val] : terms) triplets.push_back({r, col, val});
  assembled_ = false;
  return r;
}

int CanonicalProgram::num_integers() const {
  return static_cast<int>(std::count_if(vars.begin(), vars.end(), [](const Variable& v) { return v.is_integer; }));
}

void CanonicalProgram::assemble() {
  std::stable_sort(triplets.begin(), triplets.end(),
                   [](const Triplet& a, const Triplet& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
  std::vector<Triplet> merged;
  merged.reserve(triplets.size());
  for (const auto& t : triplets) {
    if (!merged.empty() && merged.back().row == t.row && merged.back().col == t.col) {
      merged.back().val += t.val;
    } else {
      merged.push_back(t);
    }
  }
  merged.erase(std::remove_if(merged.begin(), merged.end(), [](const Triplet& t) { return t.val == 0.0; }),
               merged.end());
  triplets = std::move(merged);
  assembled_ = true;
}

void CanonicalProgram::validate() const {
  if (obj.size() != vars.size()) throw ValidationError("program: objective length differs from variable count");
  for (std::size_t j = 0; j < vars.size(); ++j) {
    const auto& v = vars[j];
    if (std::isnan(v.lb) || std::isnan(v.ub) || v.lb > v.ub) {
      throw ValidationError("program: variable " + v.name + " has lb > ub");
    }
    if (v.lb == kInf || v.ub == -kInf) throw ValidationError("program: variable " + v.name + " has an infinite bound on the wrong side");
    if (!std::isfinite(obj[j])) throw ValidationError("program: non-finite objective coefficient on " + v.name);
  }
  for (const auto& r : rows) {
    if (!std::isfinite(r.rhs)) throw ValidationError("program: non-finite right-hand side in row " + r.name);
  }
  const int m = num_rows(), n = num_vars();
  const Triplet* prev = nullptr;
  for (const auto& t : triplets) {
    if (t.row < 0 || t.row >= m || t.col < 0 || t.col >= n) throw ValidationError("program: triplet index out of range");
    if (!std::isfinite(t.val)) throw ValidationError("program: non-finite coefficient in row " + rows[t.row].name);
    if (assembled_ && prev && prev->row == t.row && prev->col == t.col) {
      throw ValidationError("program: duplicate triplet in row " + rows[t.row].name);
    }
    prev = &t;
  }
}

int CanonicalProgram::var_index(const std::string& n) const {
  if (name_index_.size() != vars.size()) {
    name_index_.clear();
    for (std::size_t j = 0; j < vars.size(); ++j) name_index_.emplace(vars[j].name, static_cast<int>(j));
  }
  auto it = name_index_.find(n);
  if (it == name_index_.end()) throw ValidationError("program: unknown variable " + n);
  return it->second;
}

double CanonicalProgram::objective_value(const std::vector<double>& x) const {
  double s = obj_offset;
  for (std::size_t j = 0; j < obj.size(); ++j) s += obj[j] * x[j];
  return s;
}

std::vector<double> CanonicalProgram::row_activity(const std::vector<double>& x) const {
  std::vector<double> a(rows.size(), 0.0);
  for (const auto& t : triplets) a[t.row] += t.val * x[t.col];
  return a;
}

double CanonicalProgram::max_violation(const std::vector<double>& x, bool check_integrality, std::string* where) const {
  if (x.size() != vars.size()) throw ValidationError("program: solution length differs from variable count");
  double worst = 0.0;
  auto note = [&](double v, const std::string& w) {
    if (v > worst) {
      worst = v;
      if (where) *where = w;
    }
  };
  for (std::size_t j = 0; j < vars.size(); ++j) {
    if (!std::isfinite(x[j])) {
      note(kInf, vars[j].name);
      continue;
    }
    note(vars[j].lb - x[j], vars[j].name);
    note(x[j] - vars[j].ub, vars[j].name);
    if (check_integrality && vars[j].is_integer) note(std::abs(x[j] - std::round(x[j])), vars[j].name);
  }
  const auto act = row_activity(x);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const double d = act[i] - r.rhs;
    if (r.sense == Sense::Le) note(d, r.name);
    else if (r.sense == Sense::Ge) note(-d, r.name);
    else note(std::abs(d), r.name);
  }
  return worst;
}

std::vector<std::pair<std::string, int>> CanonicalProgram::family_counts() const {
  std::vector<std::pair<std::string, int>> out;
  for (const auto& r : rows) {
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& p) { return p.first == r.family; });
    if (it == out.end()) out.emplace_back(r.family, 1);
    else ++it->second;
  }
  return out;
}

}  // namespace jced
