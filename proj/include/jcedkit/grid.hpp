#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace jced {

struct Bus {
  int id = 0;
  double load_mw = 0.0;  // d_b, forecast load
  double ibr_mw = 0.0;   // h_b, forecast uncontrollable IBR output

  bool operator==(const Bus&) const = default;
};

struct Line {
  int id = 0;
  int from = 0;
  int to = 0;
  double reactance = 0.0;  // p.u. on base_mva
  double capacity_mw = 0.0;

  bool operator==(const Line&) const = default;
};

// C(p) = quadratic*p^2 + linear*p + constant, in $/h.
struct FuelCurve {
  double quadratic = 0.0;
  double linear = 0.0;
  double constant = 0.0;

  double operator()(double p) const { return (quadratic * p + linear) * p + constant; }
  bool operator==(const FuelCurve&) const = default;
};

struct ThermalUnit {
  int id = 0;
  int bus = 0;
  FuelCurve cost;
  double c_up = 0.0;          // $/MW/h, up reserve capacity
  double c_dn = 0.0;          // $/MW/h, down reserve capacity
  double c_redispatch = 0.0;  // $/MWh
  double p_max = 0.0;
  double p_min = 0.0;
  double ramp_up = 0.0;  // MW/min
  double ramp_dn = 0.0;  // MW/min
  double droop = 0.05;   // R_g, p.u.
  double inertia = 0.0;  // H_g, s
  double hp_fraction = 0.0;  // F_g^H
  double reheat_time = 0.0;  // T_g^R, s
  bool is_agc = true;

  bool operator==(const ThermalUnit&) const = default;
};

// Dispatchable inverter-based renewable.
struct Dibr {
  int id = 0;
  int bus = 0;
  double capacity_mw = 0.0;
  double forecast_mw = 0.0;  // forecast maximum output, bound of the base point
  double curtail_price = 0.0;  // $/MWh
  double h_max = 0.0;  // s
  double d_max = 0.0;  // p.u. on capacity

  bool operator==(const Dibr&) const = default;
};

// Energy storage. Power p_e > 0 means discharge.
struct Storage {
  int id = 0;
  int bus = 0;
  double p_max = 0.0;
  double e_low = 0.0;   // MWh
  double e_high = 0.0;  // MWh
  double e0 = 0.0;      // MWh
  double eta_ch = 0.90;
  double eta_dis = 0.95;
  double c_loss = 0.0;
  double c_up = 0.0;
  double c_dn = 0.0;
  double h_max = 0.0;
  double d_max = 0.0;

  bool operator==(const Storage&) const = default;
};

struct Thresholds {
  double rocof_max = 0.5;  // Hz/s
  double nadir_max = 0.5;  // Hz
  double ss_max = 0.25;    // Hz
  double damping = 1.0;    // D_O, p.u. on system capacity
  double dt_h = 0.25;      // dispatch period, h
  double delta_f = 0.0;
  double delta_dibr = 0.05;
  double delta_sfr = 0.05;
  double delta_line = 0.05;
  double delta_r = 0.05;

  bool operator==(const Thresholds&) const = default;
};

class GridCase {
 public:
  std::string name;
  double base_mva = 100.0;
  double f0_hz = 60.0;
  std::vector<Bus> buses;
  std::vector<Line> lines;
  std::vector<ThermalUnit> thermal;
  std::vector<Dibr> dibr;
  std::vector<Storage> storage;
  Thresholds thresholds;
  int slack_bus = 0;  // bus id
  double p_sys_override = 0.0;  // MW; 0 means use system_capacity()

  // Position of bus `id` in `buses`; throws ValidationError when unknown.
  std::size_t bus_index(int id) const;
  std::size_t slack_index() const { return bus_index(slack_bus); }

  double total_load() const;
  double total_ibr() const;
  double net_load() const { return total_load() - total_ibr(); }

  // Total installed capacity: thermal P_max + DIBR capacity + ES power rating.
  double system_capacity() const;
  // Base of the equivalent frequency-response model, MW.
  double p_sys() const { return p_sys_override > 0.0 ? p_sys_override : system_capacity(); }

  // Checks every invariant; throws ValidationError naming the first violation.
  void validate() const;

  bool operator==(const GridCase&) const = default;
};

// Reads a case document (JSON). Missing optional fields get their defaults;
// the slack bus defaults to the bus hosting the largest thermal unit.
GridCase parse_case(const std::string& json_text, const std::string& source = "<string>");
GridCase load_case(const std::filesystem::path& path);

// Serializes with every field explicit so that parse_case(dump_case(c)) == c.
std::string dump_case(const GridCase& c);
void save_case(const GridCase& c, const std::filesystem::path& path);

}  // namespace jced
