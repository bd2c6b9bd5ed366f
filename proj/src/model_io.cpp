#include "jcedkit/model_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

#include "jcedkit/error.hpp"
#include "jcedkit/numfmt.hpp"

namespace jced {

namespace {

bool short_name(const std::string& s) {
  if (s.empty() || s.size() > 8) return false;
  for (char ch : s) {
    if (std::isspace(static_cast<unsigned char>(ch)) || ch == '*' || ch == '$') return false;
  }
  return true;
}

// MPS names for columns and rows; the originals are kept unless any of them
// does not fit the fixed fields or collides with the objective row.
struct NameTable {
  std::vector<std::string> cols, rows;
  bool coded = false;
};

NameTable mps_names(const CanonicalProgram& p) {
  NameTable t;
  std::set<std::string> seen{"OBJ"};
  bool ok = true;
  for (const auto& v : p.vars) ok = ok && short_name(v.name) && seen.insert(v.name).second;
  for (const auto& r : p.rows) ok = ok && short_name(r.name) && seen.insert(r.name).second;
  t.coded = !ok;
  char buf[16];
  for (std::size_t j = 0; j < p.vars.size(); ++j) {
    if (ok) {
      t.cols.push_back(p.vars[j].name);
    } else {
      std::snprintf(buf, sizeof buf, "C%07zu", j + 1);
      t.cols.emplace_back(buf);
    }
  }
  for (std::size_t i = 0; i < p.rows.size(); ++i) {
    if (ok) {
      t.rows.push_back(p.rows[i].name);
    } else {
      std::snprintf(buf, sizeof buf, "R%07zu", i + 1);
      t.rows.emplace_back(buf);
    }
  }
  return t;
}

std::string pad(const std::string& s, std::size_t w) { return s.size() >= w ? s : s + std::string(w - s.size(), ' '); }

// Data line: fields at columns 2, 5, 15, 25, 40, 50 of the fixed layout.
std::string mps_line(const std::string& f1, const std::string& f2, const std::string& f3 = {},
                     const std::string& f4 = {}) {
  std::string s = " " + pad(f1, 2) + " " + pad(f2, 8);
  if (!f3.empty()) s += "  " + pad(f3, 8) + "  " + f4;
  while (!s.empty() && s.back() == ' ') s.pop_back();
  return s + "\n";
}

const char* sense_letter(Sense s) {
  switch (s) {
    case Sense::Le: return "L";
    case Sense::Ge: return "G";
    case Sense::Eq: return "E";
  }
  return "E";
}

}  // namespace

ModelFormat parse_model_format(const std::string& s) {
  if (s == "mps") return ModelFormat::Mps;
  if (s == "lp" || s == "lp-text") return ModelFormat::Lp;
  throw ValidationError("unknown model format '" + s + "' (expected mps or lp)");
}

std::string write_mps(const CanonicalProgram& src) {
  CanonicalProgram p = src;
  if (!p.assembled()) p.assemble();
  const auto names = mps_names(p);
  std::ostringstream out;
  out << "NAME          " << (p.name.empty() ? "jced" : p.name) << "\n";
  if (names.coded) {
    for (std::size_t j = 0; j < p.vars.size(); ++j) out << "* " << names.cols[j] << " " << p.vars[j].name << "\n";
    for (std::size_t i = 0; i < p.rows.size(); ++i) out << "* " << names.rows[i] << " " << p.rows[i].name << "\n";
  }
  out << "ROWS\n" << mps_line("N", "OBJ");
  for (std::size_t i = 0; i < p.rows.size(); ++i) out << mps_line(sense_letter(p.rows[i].sense), names.rows[i]);

  std::vector<std::vector<std::pair<int, double>>> by_col(p.vars.size());
  for (const auto& t : p.triplets) by_col[t.col].emplace_back(t.row, t.val);

  out << "COLUMNS\n";
  bool in_int = false;
  int marker = 0;
  for (std::size_t j = 0; j < p.vars.size(); ++j) {
    const bool integer = p.vars[j].is_integer;
    if (integer != in_int) {
      char buf[16];
      std::snprintf(buf, sizeof buf, "MARKER%02d", marker++ % 100);
      out << "    " << pad(buf, 8) << "  'MARKER'                 " << (integer ? "'INTORG'" : "'INTEND'") << "\n";
      in_int = integer;
    }
    const auto& c = names.cols[j];
    if (p.obj[j] != 0.0 || by_col[j].empty()) out << mps_line("", c, "OBJ", format_double(p.obj[j]));
    for (const auto& [r, v] : by_col[j]) out << mps_line("", c, names.rows[r], format_double(v));
  }
  if (in_int) out << "    MARKER99  'MARKER'                 'INTEND'\n";

  out << "RHS\n";
  if (p.obj_offset != 0.0) out << mps_line("", "RHS", "OBJ", format_double(-p.obj_offset));
  for (std::size_t i = 0; i < p.rows.size(); ++i) {
    if (p.rows[i].rhs != 0.0) out << mps_line("", "RHS", names.rows[i], format_double(p.rows[i].rhs));
  }

  out << "BOUNDS\n";
  for (std::size_t j = 0; j < p.vars.size(); ++j) {
    const auto& v = p.vars[j];
    const auto& c = names.cols[j];
    if (v.is_integer && v.lb == 0.0 && v.ub == 1.0) {
      out << mps_line("BV", "BND", c);
    } else if (v.lb == v.ub) {
      out << mps_line("FX", "BND", c, format_double(v.lb));
    } else if (v.lb == -kInf && v.ub == kInf) {
      out << mps_line("FR", "BND", c);
    } else {
      if (v.lb == -kInf) out << mps_line("MI", "BND", c);
      else if (v.lb != 0.0) out << mps_line("LO", "BND", c, format_double(v.lb));
      if (v.ub != kInf) out << mps_line("UP", "BND", c, format_double(v.ub));
      else if (v.is_integer) out << mps_line("PL", "BND", c);
    }
  }
  out << "ENDATA\n";
  return out.str();
}

CanonicalProgram read_mps(const std::string& text, const std::string& source) {
  CanonicalProgram p;
  std::unordered_map<std::string, std::string> real;  // code -> original name
  std::unordered_map<std::string, int> row_of, col_of;
  std::string obj_row;
  enum class Sec { None, Rows, Columns, Rhs, Ranges, Bounds, End } sec = Sec::None;
  bool in_int = false;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& what) -> ParseError {
    return ParseError(source + ":" + std::to_string(lineno), what);
  };
  auto name_of = [&](const std::string& code) {
    auto it = real.find(code);
    return it == real.end() ? code : it->second;
  };
  auto col = [&](const std::string& c) {
    auto it = col_of.find(c);
    if (it == col_of.end()) throw fail("unknown column " + c);
    return it->second;
  };
  auto num = [&](const std::string& s) { return parse_double(s, source + ":" + std::to_string(lineno)); };

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '*') {
      std::istringstream ls(line.substr(1));
      std::string code, orig;
      if (ls >> code >> orig) real[code] = orig;
      continue;
    }
    std::istringstream ls(line);
    std::vector<std::string> f;
    for (std::string tok; ls >> tok;) f.push_back(tok);
    if (f.empty()) continue;
    if (line[0] != ' ' && line[0] != '\t') {
      const auto& h = f[0];
      if (h == "NAME") p.name = f.size() > 1 ? f[1] : "";
      else if (h == "ROWS") sec = Sec::Rows;
      else if (h == "COLUMNS") sec = Sec::Columns;
      else if (h == "RHS") sec = Sec::Rhs;
      else if (h == "RANGES") sec = Sec::Ranges;
      else if (h == "BOUNDS") sec = Sec::Bounds;
      else if (h == "ENDATA") sec = Sec::End;
      else throw fail("unknown section " + h);
      continue;
    }
    switch (sec) {
      case Sec::Rows: {
        if (f.size() != 2) throw fail("ROWS entry needs a type and a name");
        if (f[0] == "N") {
          if (obj_row.empty()) obj_row = f[1];
          continue;
        }
        Sense s;
        if (f[0] == "L") s = Sense::Le;
        else if (f[0] == "G") s = Sense::Ge;
        else if (f[0] == "E") s = Sense::Eq;
        else throw fail("unknown row type " + f[0]);
        row_of[f[1]] = p.add_row(name_of(f[1]), s, 0.0, {});
        break;
      }
      case Sec::Columns: {
        if (f.size() >= 3 && f[1] == "'MARKER'") {
          if (f[2] == "'INTORG'") in_int = true;
          else if (f[2] == "'INTEND'") in_int = false;
          else throw fail("unknown marker " + f[2]);
          continue;
        }
        if (f.size() != 3 && f.size() != 5) throw fail("COLUMNS entry needs 3 or 5 fields");
        int j;
        auto it = col_of.find(f[0]);
        if (it == col_of.end()) {
          j = p.add_var(name_of(f[0]), 0.0, kInf, 0.0, in_int);
          col_of[f[0]] = j;
        } else {
          j = it->second;
        }
        for (std::size_t k = 1; k + 1 < f.size(); k += 2) {
          const double v = num(f[k + 1]);
          if (f[k] == obj_row) {
            p.obj[j] += v;
          } else {
            auto r = row_of.find(f[k]);
            if (r == row_of.end()) throw fail("unknown row " + f[k]);
            p.add_coef(r->second, j, v);
          }
        }
        break;
      }
      case Sec::Rhs: {
        if (f.size() != 3 && f.size() != 5) throw fail("RHS entry needs 3 or 5 fields");
        for (std::size_t k = 1; k + 1 < f.size(); k += 2) {
          const double v = num(f[k + 1]);
          if (f[k] == obj_row) {
            p.obj_offset = -v;
          } else {
            auto r = row_of.find(f[k]);
            if (r == row_of.end()) throw fail("unknown row " + f[k]);
            p.rows[r->second].rhs = v;
          }
        }
        break;
      }
      case Sec::Ranges: throw fail("RANGES are not supported");
      case Sec::Bounds: {
        if (f.size() < 3) throw fail("BOUNDS entry needs a type, a set name and a column");
        auto& v = p.vars[col(f[2])];
        const auto& t = f[0];
        auto val = [&] {
          if (f.size() < 4) throw fail("bound " + t + " needs a value");
          return num(f[3]);
        };
        if (t == "UP") v.ub = val();
        else if (t == "LO") v.lb = val();
        else if (t == "FX") v.lb = v.ub = val();
        else if (t == "FR") v.lb = -kInf, v.ub = kInf;
        else if (t == "MI") v.lb = -kInf;
        else if (t == "PL") v.ub = kInf;
        else if (t == "BV") v.lb = 0.0, v.ub = 1.0, v.is_integer = true;
        else if (t == "LI") v.lb = val(), v.is_integer = true;
        else if (t == "UI") v.ub = val(), v.is_integer = true;
        else throw fail("unknown bound type " + t);
        break;
      }
      case Sec::None:
      case Sec::End: throw fail("data outside a section");
    }
  }
  if (sec != Sec::End) throw ParseError(source, "missing ENDATA");
  p.assemble();
  p.validate();
  return p;
}

std::string write_lp(const CanonicalProgram& src) {
  CanonicalProgram p = src;
  if (!p.assembled()) p.assemble();
  std::ostringstream out;
  auto term = [&](double v, int j, bool first) {
    std::string s;
    if (v < 0) s = first ? "- " : " - ";
    else s = first ? "" : " + ";
    return s + format_double(std::abs(v)) + " " + p.vars[j].name;
  };
  out << "\\ " << p.name << "\n";
  out << "\\ objective constant: " << format_double(p.obj_offset) << "\n";
  out << "Minimize\n obj:";
  bool first = true;
  for (std::size_t j = 0; j < p.vars.size(); ++j) {
    if (p.obj[j] == 0.0) continue;
    out << " " << term(p.obj[j], static_cast<int>(j), first);
    first = false;
  }
  if (first) out << " 0 " << (p.vars.empty() ? "" : p.vars[0].name);
  out << "\nSubject To\n";
  std::size_t k = 0;
  for (std::size_t i = 0; i < p.rows.size(); ++i) {
    out << " " << p.rows[i].name << ":";
    first = true;
    for (; k < p.triplets.size() && p.triplets[k].row == static_cast<int>(i); ++k) {
      out << " " << term(p.triplets[k].val, p.triplets[k].col, first);
      first = false;
    }
    if (first) out << " 0 " << (p.vars.empty() ? "x" : p.vars[0].name);
    const char* op = p.rows[i].sense == Sense::Le ? "<=" : p.rows[i].sense == Sense::Ge ? ">=" : "=";
    out << " " << op << " " << format_double(p.rows[i].rhs) << "\n";
  }
  out << "Bounds\n";
  for (const auto& v : p.vars) {
    if (v.lb == -kInf && v.ub == kInf) {
      out << " " << v.name << " free\n";
    } else if (v.lb == v.ub) {
      out << " " << v.name << " = " << format_double(v.lb) << "\n";
    } else {
      out << " " << (v.lb == -kInf ? "-inf" : format_double(v.lb)) << " <= " << v.name << " <= "
          << (v.ub == kInf ? "+inf" : format_double(v.ub)) << "\n";
    }
  }
  bool any_bin = false, any_gen = false;
  for (const auto& v : p.vars) {
    if (!v.is_integer) continue;
    if (v.lb == 0.0 && v.ub == 1.0) any_bin = true;
    else any_gen = true;
  }
  if (any_gen) {
    out << "Generals\n";
    for (const auto& v : p.vars) {
      if (v.is_integer && !(v.lb == 0.0 && v.ub == 1.0)) out << " " << v.name << "\n";
    }
  }
  if (any_bin) {
    out << "Binaries\n";
    for (const auto& v : p.vars) {
      if (v.is_integer && v.lb == 0.0 && v.ub == 1.0) out << " " << v.name << "\n";
    }
  }
  out << "End\n";
  return out.str();
}

void export_model(const CanonicalProgram& p, ModelFormat fmt, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path.string() + " for writing");
  f << (fmt == ModelFormat::Mps ? write_mps(p) : write_lp(p));
  if (!f) throw Error("write failed: " + path.string());
}

CanonicalProgram import_mps(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return read_mps(ss.str(), path.string());
}

SolutionFile parse_solution(const std::string& text, const std::string& source) {
  SolutionFile s;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::istringstream ls{std::string(t)};
    std::string a, b, extra;
    ls >> a >> b;
    const std::string where = source + ":" + std::to_string(lineno);
    if (b.empty() || (ls >> extra)) throw ParseError(where, "expected '<name> <value>'");
    if (a == "status") s.status = b;
    else if (a == "objective") s.objective = parse_double(b, where);
    else s.values[a] = parse_double(b, where);
  }
  return s;
}

std::string write_solution(const CanonicalProgram& p, const std::vector<double>& x, const std::string& status,
                           double objective) {
  std::ostringstream out;
  out << "status " << status << "\n";
  out << "objective " << format_double(objective) << "\n";
  for (std::size_t j = 0; j < p.vars.size() && j < x.size(); ++j) {
    out << p.vars[j].name << " " << format_double(x[j]) << "\n";
  }
  return out.str();
}

std::string symbolic_to_json(const SymbolicModel& m, int indent) {
  using nlohmann::ordered_json;
  const auto& p = m.det;
  auto bound = [](double v) -> ordered_json {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
  };
  auto terms = [&](const Terms& t) {
    ordered_json o = ordered_json::object();
    for (const auto& [j, c] : t) o[p.vars[j].name] = c;
    return o;
  };
  ordered_json j;
  j["format"] = "jcedkit-symbolic-1";
  j["mode"] = to_string(m.mode.kind);
  j["fuel_segments"] = m.fuel_segments;
  ordered_json vars = ordered_json::array();
  for (const auto& v : p.vars) vars.push_back({{"name", v.name}, {"lb", bound(v.lb)}, {"ub", bound(v.ub)}});
  j["variables"] = vars;
  ordered_json obj = ordered_json::object();
  for (std::size_t k = 0; k < p.vars.size(); ++k) {
    if (p.obj[k] != 0.0) obj[p.vars[k].name] = p.obj[k];
  }
  j["objective"] = {{"offset", p.obj_offset}, {"terms", obj}};
  std::vector<Terms> row_terms(p.rows.size());
  for (const auto& t : p.triplets) row_terms[t.row].emplace_back(t.col, t.val);
  ordered_json rows = ordered_json::array();
  for (std::size_t i = 0; i < p.rows.size(); ++i) {
    const auto& r = p.rows[i];
    rows.push_back({{"name", r.name},
                    {"family", r.family},
                    {"sense", r.sense == Sense::Le ? "<=" : r.sense == Sense::Ge ? ">=" : "="},
                    {"rhs", r.rhs},
                    {"terms", terms(row_terms[i])}});
  }
  j["rows"] = rows;
  ordered_json blocks = ordered_json::array();
  for (const auto& b : m.blocks) {
    ordered_json br = ordered_json::array();
    for (const auto& r : b.rows) br.push_back({{"name", r.name}, {"lhs", terms(r.lhs)}, {"rhs", r.rhs}});
    ordered_json pairs = ordered_json::array();
    for (const auto& pr : b.pairs) pairs.push_back({{"low", pr.low}, {"up", pr.up}, {"capacity", pr.capacity}});
    blocks.push_back({{"kind", to_string(b.kind)},
                      {"family", b.family},
                      {"indicator", "z_" + b.family + "_<i>"},
                      {"delta", b.delta},
                      {"rows", br},
                      {"pairs", pairs}});
  }
  j["chance_blocks"] = blocks;
  ordered_json pieces = ordered_json::array();
  for (const auto& pc : m.boundary.pieces) pieces.push_back({pc.alpha, pc.beta});
  j["nadir_boundary"] = {{"dp_mw", m.boundary.dp_mw},
                         {"threshold_hz", m.boundary.threshold_hz},
                         {"d_lo", m.boundary.d_lo},
                         {"d_hi", m.boundary.d_hi},
                         {"pieces", pieces}};
  j["quantiles"] = {{"abs_dp_qF", m.quantiles.abs_dp_qF},
                    {"dp_up_qR", m.quantiles.dp_up_qR},
                    {"dp_dn_qR", m.quantiles.dp_dn_qR}};
  j["expected_abs_dp"] = m.expected_abs_dp;
  j["warnings"] = m.warnings;
  return j.dump(indent);
}

}  // namespace jced
