#include "jcedkit/grid.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <queue>
#include <set>
#include <sstream>
#include <unordered_map>

#include "jcedkit/error.hpp"
#include "json.hpp"

namespace jced {

using nlohmann::json;

std::size_t GridCase::bus_index(int id) const {
  for (std::size_t i = 0; i < buses.size(); ++i) {
    if (buses[i].id == id) return i;
  }
  throw ValidationError("unknown bus id " + std::to_string(id));
}

double GridCase::total_load() const {
  double s = 0.0;
  for (const auto& b : buses) s += b.load_mw;
  return s;
}

double GridCase::total_ibr() const {
  double s = 0.0;
  for (const auto& b : buses) s += b.ibr_mw;
  return s;
}

double GridCase::system_capacity() const {
  double s = 0.0;
  for (const auto& g : thermal) s += g.p_max;
  for (const auto& w : dibr) s += w.capacity_mw;
  for (const auto& e : storage) s += e.p_max;
  return s;
}

namespace {

[[noreturn]] void invalid(const std::string& who, const std::string& what) {
  throw ValidationError(who + ": " + what);
}

template <typename T>
std::string label(const char* kind, const T& item) {
  return std::string(kind) + " " + std::to_string(item.id);
}

void check_in_unit(const std::string& who, const char* name, double v) {
  if (!(v > 0.0 && v <= 1.0)) invalid(who, std::string(name) + " must lie in (0,1], got " + std::to_string(v));
}

void check_delta(const char* name, double v) {
  if (!(v >= 0.0 && v <= 1.0)) invalid("thresholds", std::string(name) + " must lie in [0,1]");
}

}  // namespace

void GridCase::validate() const {
  if (!(base_mva > 0.0)) invalid("case", "base_mva must be > 0");
  if (!(f0_hz > 0.0)) invalid("case", "f0_hz must be > 0");
  if (p_sys_override < 0.0) invalid("case", "p_sys must be >= 0");
  if (buses.empty()) invalid("case", "at least one bus is required");

  std::set<int> ids;
  for (const auto& b : buses) {
    if (!ids.insert(b.id).second) invalid(label("bus", b), "duplicate bus id");
    if (b.load_mw < 0.0) invalid(label("bus", b), "d_b must be >= 0");
    if (b.ibr_mw < 0.0) invalid(label("bus", b), "h_b must be >= 0");
  }
  auto has_bus = [&](int id) { return ids.count(id) > 0; };

  for (const auto& l : lines) {
    const auto who = label("line", l);
    if (!has_bus(l.from) || !has_bus(l.to)) invalid(who, "references an unknown bus");
    if (l.from == l.to) invalid(who, "from and to must differ");
    if (!(l.reactance > 0.0)) invalid(who, "reactance must be > 0");
    if (!(l.capacity_mw > 0.0)) invalid(who, "F_l must be > 0");
  }
  for (const auto& g : thermal) {
    const auto who = label("thermal unit", g);
    if (!has_bus(g.bus)) invalid(who, "references an unknown bus");
    if (g.p_min > g.p_max) invalid(who, "p_min > p_max");
    if (g.p_min < 0.0) invalid(who, "p_min must be >= 0");
    if (!(g.droop > 0.0)) invalid(who, "R_g must be > 0");
    if (!(g.inertia > 0.0)) invalid(who, "H_g must be > 0");
    if (!(g.hp_fraction >= 0.0 && g.hp_fraction <= 1.0)) invalid(who, "F_g_H must lie in [0,1]");
    if (!(g.reheat_time > 0.0)) invalid(who, "T_g_R must be > 0");
    if (g.ramp_up < 0.0 || g.ramp_dn < 0.0) invalid(who, "ramp limits must be >= 0");
    if (g.c_up < 0.0 || g.c_dn < 0.0 || g.c_redispatch < 0.0) invalid(who, "prices must be >= 0");
  }
  for (const auto& w : dibr) {
    const auto who = label("dibr", w);
    if (!has_bus(w.bus)) invalid(who, "references an unknown bus");
    if (!(w.capacity_mw > 0.0)) invalid(who, "p_cap must be > 0");
    if (w.forecast_mw < 0.0 || w.forecast_mw > w.capacity_mw) invalid(who, "p_forecast must lie in [0, p_cap]");
    if (w.h_max < 0.0) invalid(who, "H_max must be >= 0");
    if (w.d_max < 0.0) invalid(who, "D_max must be >= 0");
  }
  for (const auto& e : storage) {
    const auto who = label("storage", e);
    if (!has_bus(e.bus)) invalid(who, "references an unknown bus");
    if (!(e.p_max > 0.0)) invalid(who, "p_max must be > 0");
    check_in_unit(who, "eta_ch", e.eta_ch);
    check_in_unit(who, "eta_dis", e.eta_dis);
    if (!(e.e_low <= e.e0 && e.e0 <= e.e_high)) invalid(who, "requires E_low <= E0 <= E_high");
    if (e.h_max < 0.0 || e.d_max < 0.0) invalid(who, "H_max and D_max must be >= 0");
  }

  const auto& t = thresholds;
  if (!(t.rocof_max > 0.0 && t.nadir_max > 0.0 && t.ss_max > 0.0)) {
    invalid("thresholds", "frequency bounds must be > 0");
  }
  if (t.damping < 0.0) invalid("thresholds", "D_O must be >= 0");
  if (!(t.dt_h > 0.0)) invalid("thresholds", "dt must be > 0");
  check_delta("delta_F", t.delta_f);
  check_delta("delta_DIBR", t.delta_dibr);
  check_delta("delta_SFR", t.delta_sfr);
  check_delta("delta_L", t.delta_line);
  check_delta("delta_R", t.delta_r);

  {
    std::set<int> line_ids;
    for (const auto& l : lines) {
      if (!line_ids.insert(l.id).second) invalid(label("line", l), "duplicate line id");
    }
  }
  if (!has_bus(slack_bus)) invalid("case", "slack bus " + std::to_string(slack_bus) + " does not exist");
  if (!(p_sys() > 0.0)) invalid("case", "system capacity p_sys must be > 0");

  // Connectivity by BFS from the slack bus.
  std::unordered_map<int, std::vector<int>> adj;
  for (const auto& l : lines) {
    adj[l.from].push_back(l.to);
    adj[l.to].push_back(l.from);
  }
  std::set<int> seen{slack_bus};
  std::queue<int> q;
  q.push(slack_bus);
  while (!q.empty()) {
    int b = q.front();
    q.pop();
    for (int nb : adj[b]) {
      if (seen.insert(nb).second) q.push(nb);
    }
  }
  if (seen.size() != buses.size()) {
    for (const auto& b : buses) {
      if (!seen.count(b.id)) invalid("network", "disconnected: bus " + std::to_string(b.id) + " unreachable from slack");
    }
  }
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

namespace {

class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  double num(const char* key) const {
    auto it = j_.find(key);
    if (it == j_.end()) throw ParseError(path_ + "." + key, "missing required field");
    if (!it->is_number()) throw ParseError(path_ + "." + key, "expected a number");
    return it->get<double>();
  }
  double num(const char* key, double fallback) const {
    return j_.contains(key) ? num(key) : fallback;
  }
  int integer(const char* key) const {
    auto it = j_.find(key);
    if (it == j_.end()) throw ParseError(path_ + "." + key, "missing required field");
    if (!it->is_number_integer()) throw ParseError(path_ + "." + key, "expected an integer");
    return it->get<int>();
  }
  bool boolean(const char* key, bool fallback) const {
    auto it = j_.find(key);
    if (it == j_.end()) return fallback;
    if (!it->is_boolean()) throw ParseError(path_ + "." + key, "expected a boolean");
    return it->get<bool>();
  }
  bool has(const char* key) const { return j_.contains(key); }
  const json& at(const char* key) const { return j_.at(key); }
  const std::string& path() const { return path_; }

 private:
  const json& j_;
  std::string path_;
};

const json& array_field(const json& root, const char* key, bool required) {
  static const json empty = json::array();
  auto it = root.find(key);
  if (it == root.end()) {
    if (required) throw ParseError(std::string("$.") + key, "missing required array");
    return empty;
  }
  if (!it->is_array()) throw ParseError(std::string("$.") + key, "expected an array");
  return *it;
}

FuelCurve read_fuel(const json& j, const std::string& path) {
  FuelCurve f;
  if (j.is_array()) {
    // [quadratic, linear, constant]; shorter arrays are linear / constant-free.
    if (j.empty() || j.size() > 3) throw ParseError(path, "cost_coeffs array must have 1 to 3 entries");
    std::vector<double> v;
    for (const auto& x : j) {
      if (!x.is_number()) throw ParseError(path, "cost_coeffs entries must be numbers");
      v.push_back(x.get<double>());
    }
    if (v.size() == 3) f = {v[0], v[1], v[2]};
    if (v.size() == 2) f = {0.0, v[0], v[1]};
    if (v.size() == 1) f = {0.0, v[0], 0.0};
    return f;
  }
  if (j.is_object()) {
    Reader r(j, path);
    f.quadratic = r.num("a", 0.0);
    f.linear = r.num("b");
    f.constant = r.num("c", 0.0);
    return f;
  }
  throw ParseError(path, "cost_coeffs must be an array or {a,b,c} object");
}

}  // namespace

GridCase parse_case(const std::string& json_text, const std::string& source) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(source + ":byte " + std::to_string(e.byte), e.what());
  }
  if (!root.is_object()) throw ParseError(source, "case document must be a JSON object");

  GridCase c;
  Reader top(root, "$");
  c.name = root.value("name", std::string{});
  c.base_mva = top.num("base_mva");
  c.f0_hz = top.num("f0_hz");
  c.p_sys_override = top.num("p_sys", 0.0);

  const auto& buses = array_field(root, "buses", true);
  for (std::size_t i = 0; i < buses.size(); ++i) {
    Reader r(buses[i], "$.buses[" + std::to_string(i) + "]");
    c.buses.push_back({r.integer("id"), r.num("d_b", 0.0), r.num("h_b", 0.0)});
  }
  const auto& lines = array_field(root, "lines", false);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    Reader r(lines[i], "$.lines[" + std::to_string(i) + "]");
    c.lines.push_back({r.integer("id"), r.integer("from"), r.integer("to"), r.num("reactance"), r.num("F_l")});
  }
  const auto& thermal = array_field(root, "thermal", true);
  for (std::size_t i = 0; i < thermal.size(); ++i) {
    const std::string path = "$.thermal[" + std::to_string(i) + "]";
    Reader r(thermal[i], path);
    ThermalUnit g;
    g.id = r.integer("id");
    g.bus = r.integer("bus");
    if (!r.has("cost_coeffs")) throw ParseError(path + ".cost_coeffs", "missing required field");
    g.cost = read_fuel(r.at("cost_coeffs"), path + ".cost_coeffs");
    g.c_up = r.num("c_g_up", 0.4 * g.cost.linear);
    g.c_dn = r.num("c_g_dn", 0.4 * g.cost.linear);
    g.c_redispatch = r.num("c_g_r", 1.2 * g.cost.linear);
    g.p_max = r.num("p_max");
    g.p_min = r.num("p_min", 0.0);
    g.ramp_up = r.num("ramp_up");
    g.ramp_dn = r.num("ramp_dn", g.ramp_up);
    g.droop = r.num("R_g");
    g.inertia = r.num("H_g");
    g.hp_fraction = r.num("F_g_H");
    g.reheat_time = r.num("T_g_R");
    g.is_agc = r.boolean("is_agc", true);
    c.thermal.push_back(g);
  }
  const auto& dibr = array_field(root, "dibr", false);
  for (std::size_t i = 0; i < dibr.size(); ++i) {
    Reader r(dibr[i], "$.dibr[" + std::to_string(i) + "]");
    Dibr w;
    w.id = r.integer("id");
    w.bus = r.integer("bus");
    w.capacity_mw = r.num("p_cap");
    w.forecast_mw = r.num("p_forecast", w.capacity_mw);
    w.curtail_price = r.num("c_w", 0.0);
    w.h_max = r.num("H_max", 0.0);
    w.d_max = r.num("D_max", 0.0);
    c.dibr.push_back(w);
  }
  const auto& storage = array_field(root, "storage", false);
  for (std::size_t i = 0; i < storage.size(); ++i) {
    Reader r(storage[i], "$.storage[" + std::to_string(i) + "]");
    Storage e;
    e.id = r.integer("id");
    e.bus = r.integer("bus");
    e.p_max = r.num("p_max");
    e.e_low = r.num("E_low");
    e.e_high = r.num("E_high");
    e.e0 = r.num("E0");
    e.eta_ch = r.num("eta_ch", 0.90);
    e.eta_dis = r.num("eta_dis", 0.95);
    e.c_loss = r.num("c_loss", 0.0);
    e.c_up = r.num("c_e_up", 0.0);
    e.c_dn = r.num("c_e_dn", 0.0);
    e.h_max = r.num("H_max", 0.0);
    e.d_max = r.num("D_max", 0.0);
    c.storage.push_back(e);
  }

  if (root.contains("thresholds")) {
    const auto& tj = root.at("thresholds");
    if (!tj.is_object()) throw ParseError("$.thresholds", "expected an object");
    Reader r(tj, "$.thresholds");
    auto& t = c.thresholds;
    t.rocof_max = r.num("df_rate_max", t.rocof_max);
    t.nadir_max = r.num("df_max", t.nadir_max);
    t.ss_max = r.num("df_ss_max", t.ss_max);
    t.damping = r.num("D_O", t.damping);
    t.dt_h = r.num("dt", t.dt_h);
    t.delta_f = r.num("delta_F", t.delta_f);
    t.delta_dibr = r.num("delta_DIBR", t.delta_dibr);
    t.delta_sfr = r.num("delta_SFR", t.delta_sfr);
    t.delta_line = r.num("delta_L", t.delta_line);
    t.delta_r = r.num("delta_R", t.delta_sfr);
  }

  if (root.contains("slack_bus")) {
    c.slack_bus = top.integer("slack_bus");
  } else {
    if (c.thermal.empty()) throw ValidationError("case: no thermal unit to host the default slack bus");
    auto largest = std::max_element(c.thermal.begin(), c.thermal.end(),
                                    [](const auto& a, const auto& b) { return a.p_max < b.p_max; });
    c.slack_bus = largest->bus;
  }

  c.validate();
  return c;
}

GridCase load_case(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), "cannot open case file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_case(ss.str(), path.string());
}

std::string dump_case(const GridCase& c) {
  json root = json::object();
  root["name"] = c.name;
  root["base_mva"] = c.base_mva;
  root["f0_hz"] = c.f0_hz;
  root["slack_bus"] = c.slack_bus;
  if (c.p_sys_override > 0.0) root["p_sys"] = c.p_sys_override;
  json buses = json::array();
  for (const auto& b : c.buses) buses.push_back({{"id", b.id}, {"d_b", b.load_mw}, {"h_b", b.ibr_mw}});
  root["buses"] = buses;
  json lines = json::array();
  for (const auto& l : c.lines) {
    lines.push_back({{"id", l.id}, {"from", l.from}, {"to", l.to}, {"reactance", l.reactance}, {"F_l", l.capacity_mw}});
  }
  root["lines"] = lines;
  json thermal = json::array();
  for (const auto& g : c.thermal) {
    thermal.push_back({{"id", g.id},
                       {"bus", g.bus},
                       {"cost_coeffs", {g.cost.quadratic, g.cost.linear, g.cost.constant}},
                       {"c_g_up", g.c_up},
                       {"c_g_dn", g.c_dn},
                       {"c_g_r", g.c_redispatch},
                       {"p_max", g.p_max},
                       {"p_min", g.p_min},
                       {"ramp_up", g.ramp_up},
                       {"ramp_dn", g.ramp_dn},
                       {"R_g", g.droop},
                       {"H_g", g.inertia},
                       {"F_g_H", g.hp_fraction},
                       {"T_g_R", g.reheat_time},
                       {"is_agc", g.is_agc}});
  }
  root["thermal"] = thermal;
  json dibr = json::array();
  for (const auto& w : c.dibr) {
    dibr.push_back({{"id", w.id},
                    {"bus", w.bus},
                    {"p_cap", w.capacity_mw},
                    {"p_forecast", w.forecast_mw},
                    {"c_w", w.curtail_price},
                    {"H_max", w.h_max},
                    {"D_max", w.d_max}});
  }
  root["dibr"] = dibr;
  json storage = json::array();
  for (const auto& e : c.storage) {
    storage.push_back({{"id", e.id},
                       {"bus", e.bus},
                       {"p_max", e.p_max},
                       {"E_low", e.e_low},
                       {"E_high", e.e_high},
                       {"E0", e.e0},
                       {"eta_ch", e.eta_ch},
                       {"eta_dis", e.eta_dis},
                       {"c_loss", e.c_loss},
                       {"c_e_up", e.c_up},
                       {"c_e_dn", e.c_dn},
                       {"H_max", e.h_max},
                       {"D_max", e.d_max}});
  }
  root["storage"] = storage;
  const auto& t = c.thresholds;
  root["thresholds"] = {{"df_rate_max", t.rocof_max}, {"df_max", t.nadir_max}, {"df_ss_max", t.ss_max},
                        {"D_O", t.damping},           {"dt", t.dt_h},            {"delta_F", t.delta_f},
                        {"delta_DIBR", t.delta_dibr}, {"delta_SFR", t.delta_sfr}, {"delta_L", t.delta_line},
                        {"delta_R", t.delta_r}};
  return root.dump(2) + "\n";
}

void save_case(const GridCase& c, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write case file " + path.string());
  out << dump_case(c);
}

}  // namespace jced
