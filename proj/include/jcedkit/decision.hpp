#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "jcedkit/grid.hpp"

namespace jced {

// Every decision variable of the dispatch, in case device order. Powers in
// MW, inertia in s, droop in p.u. of the device rating.
struct DispatchDecision {
  std::vector<double> p_g, r_up, r_dn, alpha;
  std::vector<double> p_w, H_w, D_w;
  std::vector<double> p_e, r_e_up, r_e_dn, p_loss, H_e, D_e;

  static DispatchDecision zeros(const GridCase& c);
  // Throws ValidationError when vector lengths do not match the case.
  void check_dimensions(const GridCase& c) const;

  bool operator==(const DispatchDecision&) const = default;
};

// Per-device inertia/droop settings, the part of a decision that drives the
// frequency response.
struct InverterSettings {
  std::vector<double> H_w, D_w, H_e, D_e;

  static InverterSettings from(const DispatchDecision& d) { return {d.H_w, d.D_w, d.H_e, d.D_e}; }
  static InverterSettings zeros(const GridCase& c);
  static InverterSettings uniform(const GridCase& c, double H, double D);
};

std::string decision_to_json(const DispatchDecision& d, const GridCase& c);
DispatchDecision decision_from_json(const std::string& text, const GridCase& c, const std::string& source = "<string>");
void save_decision(const DispatchDecision& d, const GridCase& c, const std::filesystem::path& path);
DispatchDecision load_decision(const std::filesystem::path& path, const GridCase& c);

}  // namespace jced
