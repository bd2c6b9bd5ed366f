#include "jcedkit/decision.hpp"

#include <fstream>
#include <sstream>

#include "jcedkit/error.hpp"
#include "json.hpp"

namespace jced {

using nlohmann::json;

DispatchDecision DispatchDecision::zeros(const GridCase& c) {
  DispatchDecision d;
  const auto ng = c.thermal.size(), nw = c.dibr.size(), ne = c.storage.size();
  d.p_g.assign(ng, 0.0);
  d.r_up.assign(ng, 0.0);
  d.r_dn.assign(ng, 0.0);
  d.alpha.assign(ng, 0.0);
  d.p_w.assign(nw, 0.0);
  d.H_w.assign(nw, 0.0);
  d.D_w.assign(nw, 0.0);
  d.p_e.assign(ne, 0.0);
  d.r_e_up.assign(ne, 0.0);
  d.r_e_dn.assign(ne, 0.0);
  d.p_loss.assign(ne, 0.0);
  d.H_e.assign(ne, 0.0);
  d.D_e.assign(ne, 0.0);
  return d;
}

void DispatchDecision::check_dimensions(const GridCase& c) const {
  const auto ng = c.thermal.size(), nw = c.dibr.size(), ne = c.storage.size();
  auto same = [](const std::vector<double>& v, std::size_t n) { return v.size() == n; };
  if (!same(p_g, ng) || !same(r_up, ng) || !same(r_dn, ng) || !same(alpha, ng)) {
    throw ValidationError("decision: thermal vectors do not match the case");
  }
  if (!same(p_w, nw) || !same(H_w, nw) || !same(D_w, nw)) {
    throw ValidationError("decision: DIBR vectors do not match the case");
  }
  if (!same(p_e, ne) || !same(r_e_up, ne) || !same(r_e_dn, ne) || !same(p_loss, ne) || !same(H_e, ne) ||
      !same(D_e, ne)) {
    throw ValidationError("decision: storage vectors do not match the case");
  }
}

InverterSettings InverterSettings::zeros(const GridCase& c) { return uniform(c, 0.0, 0.0); }

InverterSettings InverterSettings::uniform(const GridCase& c, double H, double D) {
  InverterSettings s;
  s.H_w.assign(c.dibr.size(), H);
  s.D_w.assign(c.dibr.size(), D);
  s.H_e.assign(c.storage.size(), H);
  s.D_e.assign(c.storage.size(), D);
  return s;
}

std::string decision_to_json(const DispatchDecision& d, const GridCase& c) {
  d.check_dimensions(c);
  json root = json::object();
  json thermal = json::array();
  for (std::size_t g = 0; g < c.thermal.size(); ++g) {
    thermal.push_back({{"id", c.thermal[g].id},
                       {"p_g", d.p_g[g]},
                       {"r_up", d.r_up[g]},
                       {"r_dn", d.r_dn[g]},
                       {"alpha", d.alpha[g]}});
  }
  json dibr = json::array();
  for (std::size_t w = 0; w < c.dibr.size(); ++w) {
    dibr.push_back({{"id", c.dibr[w].id}, {"p_w", d.p_w[w]}, {"H_w", d.H_w[w]}, {"D_w", d.D_w[w]}});
  }
  json storage = json::array();
  for (std::size_t e = 0; e < c.storage.size(); ++e) {
    storage.push_back({{"id", c.storage[e].id},
                       {"p_e", d.p_e[e]},
                       {"r_e_up", d.r_e_up[e]},
                       {"r_e_dn", d.r_e_dn[e]},
                       {"p_loss", d.p_loss[e]},
                       {"H_e", d.H_e[e]},
                       {"D_e", d.D_e[e]}});
  }
  root["thermal"] = thermal;
  root["dibr"] = dibr;
  root["storage"] = storage;
  return root.dump(2) + "\n";
}

DispatchDecision decision_from_json(const std::string& text, const GridCase& c, const std::string& source) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(source + ":byte " + std::to_string(e.byte), e.what());
  }
  auto d = DispatchDecision::zeros(c);
  auto section = [&](const char* key, std::size_t n) -> const json& {
    if (!root.contains(key) || !root.at(key).is_array()) throw ParseError(std::string("$.") + key, "expected an array");
    const auto& a = root.at(key);
    if (a.size() != n) throw ParseError(std::string("$.") + key, "entry count does not match the case");
    return a;
  };
  auto num = [](const json& j, const char* k, const std::string& path) {
    if (!j.contains(k) || !j.at(k).is_number()) throw ParseError(path + "." + k, "expected a number");
    return j.at(k).get<double>();
  };
  const auto& th = section("thermal", c.thermal.size());
  for (std::size_t g = 0; g < th.size(); ++g) {
    const auto p = "$.thermal[" + std::to_string(g) + "]";
    d.p_g[g] = num(th[g], "p_g", p);
    d.r_up[g] = num(th[g], "r_up", p);
    d.r_dn[g] = num(th[g], "r_dn", p);
    d.alpha[g] = num(th[g], "alpha", p);
  }
  const auto& dw = section("dibr", c.dibr.size());
  for (std::size_t w = 0; w < dw.size(); ++w) {
    const auto p = "$.dibr[" + std::to_string(w) + "]";
    d.p_w[w] = num(dw[w], "p_w", p);
    d.H_w[w] = num(dw[w], "H_w", p);
    d.D_w[w] = num(dw[w], "D_w", p);
  }
  const auto& st = section("storage", c.storage.size());
  for (std::size_t e = 0; e < st.size(); ++e) {
    const auto p = "$.storage[" + std::to_string(e) + "]";
    d.p_e[e] = num(st[e], "p_e", p);
    d.r_e_up[e] = num(st[e], "r_e_up", p);
    d.r_e_dn[e] = num(st[e], "r_e_dn", p);
    d.p_loss[e] = num(st[e], "p_loss", p);
    d.H_e[e] = num(st[e], "H_e", p);
    d.D_e[e] = num(st[e], "D_e", p);
  }
  return d;
}

void save_decision(const DispatchDecision& d, const GridCase& c, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write decision file " + path.string());
  out << decision_to_json(d, c);
}

DispatchDecision load_decision(const std::filesystem::path& path, const GridCase& c) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), "cannot open decision file");
  std::stringstream ss;
  ss << in.rdbuf();
  return decision_from_json(ss.str(), c, path.string());
}

}  // namespace jced
