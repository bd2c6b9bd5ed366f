#include "jcedkit/run_config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

#include "jcedkit/error.hpp"

namespace jced {

using json = nlohmann::ordered_json;

void apply_threshold(Thresholds& t, const std::string& key, double value) {
  if (key == "df_rate_max") t.rocof_max = value;
  else if (key == "df_max") t.nadir_max = value;
  else if (key == "df_ss_max") t.ss_max = value;
  else if (key == "D_O") t.damping = value;
  else if (key == "dt") t.dt_h = value;
  else if (key == "delta_F") t.delta_f = value;
  else if (key == "delta_DIBR") t.delta_dibr = value;
  else if (key == "delta_SFR") t.delta_sfr = value;
  else if (key == "delta_L") t.delta_line = value;
  else if (key == "delta_R") t.delta_r = value;
  else throw ValidationError("unknown threshold '" + key + "'");
}

std::pair<std::string, double> parse_threshold_assignment(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0) throw ParseError(s, "expected key=value");
  const std::string key = s.substr(0, eq);
  const std::string val = s.substr(eq + 1);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(val, &used);
  } catch (const std::exception&) {
    throw ParseError(s, "value is not a number");
  }
  if (used != val.size()) throw ParseError(s, "value is not a number");
  Thresholds probe;
  apply_threshold(probe, key, v);
  return {key, v};
}

std::filesystem::path default_uncertainty_path(const std::filesystem::path& case_path) {
  auto p = case_path;
  p.replace_extension(".uncertainty.json");
  return p;
}

void RunConfig::validate() const {
  if (case_path.empty()) throw ValidationError("run config: case path is required");
  if (!std::filesystem::exists(case_path)) throw ValidationError("run config: case file not found: " + case_path.string());
  if (!uncertainty_path.empty() && !std::filesystem::exists(uncertainty_path)) {
    throw ValidationError("run config: uncertainty file not found: " + uncertainty_path.string());
  }
  if (!scenarios_path.empty() && !std::filesystem::exists(scenarios_path)) {
    throw ValidationError("run config: scenario file not found: " + scenarios_path.string());
  }
  if (scenarios_path.empty() && n < 1) throw ValidationError("run config: n must be >= 1");
  if (methods.empty()) throw ValidationError("run config: at least one method is required");
  if (jobs < 1) throw ValidationError("run config: jobs must be >= 1");
  if (!(time_limit_s > 0.0)) throw ValidationError("run config: time limit must be > 0");
  if (!(gap >= 0.0)) throw ValidationError("run config: gap must be >= 0");
  if (test_n < 1) throw ValidationError("run config: test_n must be >= 1");
  if (mode == ModeKind::FixJced && (fix_H < 0.0 || fix_D < 0.0)) {
    throw ValidationError("run config: fixed H and D must be >= 0");
  }
  Thresholds probe;
  for (const auto& [k, v] : thresholds) apply_threshold(probe, k, v);
}

RunConfig parse_run_config(const std::string& json_text, const std::string& source) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(source + ":byte " + std::to_string(e.byte), e.what());
  }
  if (!j.is_object()) throw ParseError(source, "config must be a JSON object");
  RunConfig c;
  auto str = [&](const char* k) -> std::string {
    const auto& v = j.at(k);
    if (!v.is_string()) throw ParseError(std::string("$.") + k, "expected a string");
    return v.get<std::string>();
  };
  auto num = [&](const char* k) -> double {
    const auto& v = j.at(k);
    if (!v.is_number()) throw ParseError(std::string("$.") + k, "expected a number");
    return v.get<double>();
  };
  auto count = [&](const char* k) -> std::uint64_t {
    const auto& v = j.at(k);
    if (!v.is_number_integer() || v.get<long long>() < 0) {
      throw ParseError(std::string("$.") + k, "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
  };
  for (const auto& [key, val] : j.items()) {
    const char* k = key.c_str();
    if (key == "case") c.case_path = str(k);
    else if (key == "uncertainty") c.uncertainty_path = str(k);
    else if (key == "scenarios") c.scenarios_path = str(k);
    else if (key == "n") c.n = count(k);
    else if (key == "seed") c.seed = count(k);
    else if (key == "methods") {
      if (!val.is_array()) throw ParseError("$.methods", "expected an array");
      c.methods.clear();
      for (const auto& m : val) {
        if (!m.is_string()) throw ParseError("$.methods", "expected method names");
        c.methods.push_back(parse_method(m.get<std::string>()));
      }
    } else if (key == "mode") c.mode = parse_mode(str(k));
    else if (key == "fix_H") c.fix_H = num(k);
    else if (key == "fix_D") c.fix_D = num(k);
    else if (key == "backend") c.backend = str(k);
    else if (key == "out") c.out_dir = str(k);
    else if (key == "thresholds") {
      if (!val.is_object()) throw ParseError("$.thresholds", "expected an object");
      for (const auto& [tk, tv] : val.items()) {
        if (!tv.is_number()) throw ParseError("$.thresholds." + tk, "expected a number");
        c.thresholds[tk] = tv.get<double>();
      }
    } else if (key == "time_limit") c.time_limit_s = num(k);
    else if (key == "gap") c.gap = num(k);
    else if (key == "jobs") c.jobs = static_cast<unsigned>(count(k));
    else if (key == "fuel_segments") c.fuel_segments = static_cast<int>(count(k));
    else if (key == "nadir_pieces") c.nadir_pieces = static_cast<int>(count(k));
    else if (key == "strengthen") {
      if (!val.is_boolean()) throw ParseError("$.strengthen", "expected a boolean");
      c.strengthen = val.get<bool>();
    } else if (key == "test_n") c.test_n = count(k);
    else if (key == "test_seed") c.test_seed = count(k);
    else if (key == "shed_price") c.shed_price = num(k);
    else throw ParseError("$." + key, "unknown config field");
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), "cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), path.string());
}

std::string dump_run_config(const RunConfig& c) {
  json j;
  j["case"] = c.case_path.string();
  if (!c.uncertainty_path.empty()) j["uncertainty"] = c.uncertainty_path.string();
  if (!c.scenarios_path.empty()) j["scenarios"] = c.scenarios_path.string();
  j["n"] = c.n;
  j["seed"] = c.seed;
  json m = json::array();
  for (auto x : c.methods) m.push_back(to_string(x));
  j["methods"] = m;
  j["mode"] = to_string(c.mode);
  if (c.mode == ModeKind::FixJced) {
    j["fix_H"] = c.fix_H;
    j["fix_D"] = c.fix_D;
  }
  if (!c.backend.empty()) j["backend"] = c.backend;
  j["out"] = c.out_dir.string();
  if (!c.thresholds.empty()) j["thresholds"] = c.thresholds;
  j["time_limit"] = c.time_limit_s;
  j["gap"] = c.gap;
  j["jobs"] = c.jobs;
  j["fuel_segments"] = c.fuel_segments;
  j["nadir_pieces"] = c.nadir_pieces;
  j["strengthen"] = c.strengthen;
  j["test_n"] = c.test_n;
  if (c.test_seed) j["test_seed"] = c.test_seed;
  j["shed_price"] = c.shed_price;
  return j.dump(2);
}

}  // namespace jced
