#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "jcedkit/grid.hpp"
#include "jcedkit/reform.hpp"
#include "jcedkit/symbolic_model.hpp"

namespace jced {

// Everything a CLI run needs. The config document is JSON with the same
// field names; command-line flags override it.
struct RunConfig {
  std::filesystem::path case_path;
  std::filesystem::path uncertainty_path;  // empty: <case stem>.uncertainty.json when present
  std::filesystem::path scenarios_path;    // empty: sample n scenarios with seed
  std::size_t n = 1000;
  std::uint64_t seed = 1;
  std::vector<Method> methods{Method::Msaa};
  ModeKind mode = ModeKind::PoJced;
  double fix_H = 0.0;
  double fix_D = 0.0;
  std::string backend;
  std::filesystem::path out_dir = ".";
  std::map<std::string, double> thresholds;  // keys as in the case "thresholds" object
  double time_limit_s = 300.0;
  double gap = 1e-6;
  unsigned jobs = 1;
  int fuel_segments = 3;
  int nadir_pieces = 4;
  bool strengthen = true;
  std::size_t test_n = 10000;
  std::uint64_t test_seed = 0;  // 0: seed + 1
  double shed_price = 5000.0;

  void validate() const;
};

RunConfig parse_run_config(const std::string& json_text, const std::string& source = "<string>");
RunConfig load_run_config(const std::filesystem::path& path);
std::string dump_run_config(const RunConfig& cfg);

// Sets one threshold by its case-file key (df_rate_max, delta_L, ...).
void apply_threshold(Thresholds& t, const std::string& key, double value);
// Parses "key=value".
std::pair<std::string, double> parse_threshold_assignment(const std::string& s);

// Uncertainty file next to the case ("six_bus.json" -> "six_bus.uncertainty.json").
std::filesystem::path default_uncertainty_path(const std::filesystem::path& case_path);

}  // namespace jced
