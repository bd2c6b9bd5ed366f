#include "jcedkit/scenario.hpp"

#include <algorithm>
#include <boost/random/beta_distribution.hpp>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "jcedkit/error.hpp"
#include "jcedkit/numfmt.hpp"
#include "json.hpp"

namespace jced {

using nlohmann::json;

void BetaSpec::validate(const std::string& who) const {
  if (!(a > 0.0) || !(b > 0.0)) throw ValidationError(who + ": beta shape parameters must be > 0");
  if (!(lo <= hi)) throw ValidationError(who + ": support requires lo <= hi");
  if (!std::isfinite(lo) || !std::isfinite(hi)) throw ValidationError(who + ": support must be finite");
}

UncertaintyModel UncertaintyModel::deterministic(const GridCase& c) {
  UncertaintyModel m;
  m.load_error.assign(c.buses.size(), BetaSpec::point(0.0));
  m.ibr_error.assign(c.buses.size(), BetaSpec::point(0.0));
  for (const auto& w : c.dibr) m.dibr_available.push_back(BetaSpec::point(w.forecast_mw));
  return m;
}

void UncertaintyModel::validate(const GridCase& c) const {
  if (load_error.size() != c.buses.size() || ibr_error.size() != c.buses.size()) {
    throw ValidationError("uncertainty model: per-bus spec count does not match the case");
  }
  if (dibr_available.size() != c.dibr.size()) {
    throw ValidationError("uncertainty model: per-DIBR spec count does not match the case");
  }
  for (std::size_t b = 0; b < c.buses.size(); ++b) {
    load_error[b].validate("load_error bus " + std::to_string(c.buses[b].id));
    ibr_error[b].validate("ibr_error bus " + std::to_string(c.buses[b].id));
  }
  for (std::size_t w = 0; w < c.dibr.size(); ++w) {
    const auto who = "dibr_available " + std::to_string(c.dibr[w].id);
    const auto& s = dibr_available[w];
    s.validate(who);
    if (s.lo < 0.0 || s.hi > c.dibr[w].capacity_mw * (1.0 + 1e-12)) {
      throw ValidationError(who + ": support must lie within [0, p_cap]");
    }
  }
}

namespace {

BetaSpec read_spec(const json& j, const std::string& path, double lo_default, double hi_default, bool has_default) {
  if (!j.is_object()) throw ParseError(path, "expected an object");
  auto num = [&](const char* k, double fallback, bool required) {
    auto it = j.find(k);
    if (it == j.end()) {
      if (required) throw ParseError(path + "." + k, "missing required field");
      return fallback;
    }
    if (!it->is_number()) throw ParseError(path + "." + k, "expected a number");
    return it->get<double>();
  };
  BetaSpec s;
  if (j.contains("point")) {
    s = BetaSpec::point(num("point", 0.0, true));
    return s;
  }
  s.a = num("a", 0.0, true);
  s.b = num("b", 0.0, true);
  s.lo = num("lo", lo_default, !has_default);
  s.hi = num("hi", hi_default, !has_default);
  return s;
}

}  // namespace

UncertaintyModel parse_uncertainty(const std::string& json_text, const GridCase& c, const std::string& source) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(source + ":byte " + std::to_string(e.byte), e.what());
  }
  if (!root.is_object()) throw ParseError(source, "uncertainty document must be a JSON object");
  auto m = UncertaintyModel::deterministic(c);

  auto per_bus = [&](const char* key, std::vector<BetaSpec>& out) {
    if (!root.contains(key)) return;
    const auto& arr = root.at(key);
    if (!arr.is_array()) throw ParseError(std::string("$.") + key, "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto path = std::string("$.") + key + "[" + std::to_string(i) + "]";
      if (!arr[i].is_object() || !arr[i].contains("bus") || !arr[i]["bus"].is_number_integer()) {
        throw ParseError(path + ".bus", "missing integer bus id");
      }
      const int bus = arr[i]["bus"].get<int>();
      std::size_t idx;
      try {
        idx = c.bus_index(bus);
      } catch (const ValidationError&) {
        throw ParseError(path + ".bus", "unknown bus " + std::to_string(bus));
      }
      out[idx] = read_spec(arr[i], path, 0.0, 0.0, false);
    }
  };
  per_bus("load_error", m.load_error);
  per_bus("ibr_error", m.ibr_error);

  if (root.contains("dibr_available")) {
    const auto& arr = root.at("dibr_available");
    if (!arr.is_array()) throw ParseError("$.dibr_available", "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto path = "$.dibr_available[" + std::to_string(i) + "]";
      if (!arr[i].is_object() || !arr[i].contains("dibr") || !arr[i]["dibr"].is_number_integer()) {
        throw ParseError(path + ".dibr", "missing integer dibr id");
      }
      const int id = arr[i]["dibr"].get<int>();
      auto it = std::find_if(c.dibr.begin(), c.dibr.end(), [&](const Dibr& w) { return w.id == id; });
      if (it == c.dibr.end()) throw ParseError(path + ".dibr", "unknown dibr " + std::to_string(id));
      m.dibr_available[it - c.dibr.begin()] = read_spec(arr[i], path, 0.0, it->capacity_mw, true);
    }
  }
  m.validate(c);
  return m;
}

UncertaintyModel load_uncertainty(const std::filesystem::path& path, const GridCase& c) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), "cannot open uncertainty file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_uncertainty(ss.str(), c, path.string());
}

BetaSpec fit_beta_moments(const std::vector<double>& samples, double lo, double hi) {
  if (samples.size() < 2) throw ValidationError("beta fit needs at least two samples");
  if (!(lo < hi)) throw ValidationError("beta fit needs lo < hi");
  const double n = static_cast<double>(samples.size());
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  double var = 0.0;
  for (double x : samples) var += (x - mean) * (x - mean);
  var /= (n - 1.0);
  const double width = hi - lo;
  const double m = (mean - lo) / width;
  const double v = var / (width * width);
  if (!(m > 0.0 && m < 1.0) || !(v > 0.0) || !(v < m * (1.0 - m))) {
    throw ValidationError("beta fit: sample moments are not attainable by a beta on the given support");
  }
  const double common = m * (1.0 - m) / v - 1.0;
  return {m * common, (1.0 - m) * common, lo, hi};
}

double disturbance_of(const std::vector<double>& zeta_d, const std::vector<double>& zeta_h) {
  double s = 0.0;
  for (std::size_t b = 0; b < zeta_d.size(); ++b) s += zeta_d[b] - zeta_h[b];
  return s;
}

std::vector<double> ScenarioSet::disturbances() const {
  std::vector<double> v;
  v.reserve(scenarios.size());
  for (const auto& s : scenarios) v.push_back(s.dp_load);
  return v;
}

std::vector<double> ScenarioSet::probabilities() const {
  std::vector<double> v;
  v.reserve(scenarios.size());
  for (const auto& s : scenarios) v.push_back(s.prob);
  return v;
}

void ScenarioSet::validate(const GridCase& c) const {
  if (scenarios.empty()) throw ValidationError("scenario set is empty");
  double total = 0.0;
  for (const auto& s : scenarios) {
    const auto who = "scenario " + std::to_string(s.index);
    if (s.zeta_d.size() != c.buses.size() || s.zeta_h.size() != c.buses.size() || s.pbar.size() != c.dibr.size()) {
      throw ValidationError(who + ": dimensions do not match the case");
    }
    if (!(s.prob >= 0.0)) throw ValidationError(who + ": negative probability");
    if (s.dp_load != disturbance_of(s.zeta_d, s.zeta_h)) {
      throw ValidationError(who + ": dp_L differs from the sum of bus errors");
    }
    for (std::size_t w = 0; w < c.dibr.size(); ++w) {
      if (s.pbar[w] < 0.0 || s.pbar[w] > c.dibr[w].capacity_mw) {
        throw ValidationError(who + ": DIBR availability outside [0, p_cap]");
      }
    }
    total += s.prob;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ValidationError("scenario probabilities do not sum to 1");
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double draw(const BetaSpec& s, std::mt19937_64& rng) {
  if (s.degenerate()) return s.lo;
  boost::random::beta_distribution<double> beta(s.a, s.b);
  const double u = beta(rng);
  return std::clamp(s.lo + (s.hi - s.lo) * u, s.lo, s.hi);
}

Scenario draw_scenario(const UncertaintyModel& m, std::size_t i, std::uint64_t seed, double prob) {
  std::mt19937_64 rng(splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(i)));
  Scenario s;
  s.index = i;
  s.prob = prob;
  s.zeta_d.reserve(m.load_error.size());
  s.zeta_h.reserve(m.ibr_error.size());
  for (const auto& spec : m.load_error) s.zeta_d.push_back(draw(spec, rng));
  for (const auto& spec : m.ibr_error) s.zeta_h.push_back(draw(spec, rng));
  for (const auto& spec : m.dibr_available) s.pbar.push_back(draw(spec, rng));
  s.dp_load = disturbance_of(s.zeta_d, s.zeta_h);
  return s;
}

}  // namespace

ScenarioSet sample_scenarios(const UncertaintyModel& model, const GridCase& c, std::size_t n, std::uint64_t seed,
                             unsigned jobs) {
  if (n < 1) throw ValidationError("scenario count n must be >= 1");
  model.validate(c);
  ScenarioSet set;
  set.seed = seed;
  set.scenarios.resize(n);
  const double prob = 1.0 / static_cast<double>(n);
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) set.scenarios[i] = draw_scenario(model, i, seed, prob);
  };
  if (jobs == 1) {
    work(0, n);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + jobs - 1) / jobs;
    for (unsigned t = 0; t < jobs; ++t) {
      const std::size_t b = t * chunk, e = std::min(n, b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
    for (auto& th : pool) th.join();
  }
  // Equal weights that sum to exactly 1 are not representable for most n;
  // put the rounding residue on the last scenario.
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) total += set.scenarios[i].prob;
  set.scenarios.back().prob = 1.0 - total;
  return set;
}

ScenarioSet forecast_scenarios(const GridCase& c, std::size_t n) {
  return sample_scenarios(UncertaintyModel::deterministic(c), c, n, 0);
}

double empirical_quantile(const std::vector<double>& values, const std::vector<double>& probs, double delta,
                          QuantileSide side) {
  if (values.empty()) throw ValidationError("empirical_quantile: empty input");
  if (values.size() != probs.size()) throw ValidationError("empirical_quantile: values and probs differ in length");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  constexpr double tol = 1e-12;
  if (side == QuantileSide::Upper) {
    // Walk from the top; tail mass strictly above the candidate.
    double tail = 0.0;
    std::size_t k = order.size();
    double best = values[order.back()];
    while (k > 0) {
      const double v = values[order[k - 1]];
      // mass strictly above v is `tail` once every entry > v has been added
      if (tail <= delta + tol) best = v;
      else break;
      // absorb all entries equal to v
      while (k > 0 && values[order[k - 1]] == v) {
        tail += probs[order[k - 1]];
        --k;
      }
    }
    return best;
  }
  double head = 0.0;
  std::size_t k = 0;
  double best = values[order.front()];
  while (k < order.size()) {
    const double v = values[order[k]];
    if (head <= delta + tol) best = v;
    else break;
    while (k < order.size() && values[order[k]] == v) {
      head += probs[order[k]];
      ++k;
    }
  }
  return best;
}

DisturbanceQuantiles disturbance_quantiles(const ScenarioSet& set, const Thresholds& thr) {
  if (set.empty()) throw ValidationError("disturbance_quantiles: empty scenario set");
  auto dp = set.disturbances();
  auto pr = set.probabilities();
  std::vector<double> abs_dp(dp.size());
  std::transform(dp.begin(), dp.end(), abs_dp.begin(), [](double x) { return std::abs(x); });
  DisturbanceQuantiles q;
  q.abs_dp_qF = empirical_quantile(abs_dp, pr, thr.delta_f, QuantileSide::Upper);
  q.dp_up_qR = empirical_quantile(dp, pr, thr.delta_r / 2.0, QuantileSide::Upper);
  q.dp_dn_qR = empirical_quantile(dp, pr, thr.delta_r / 2.0, QuantileSide::Lower);
  return q;
}

std::string scenarios_to_csv(const ScenarioSet& set, const GridCase& c) {
  std::ostringstream out;
  out << "# seed=" << set.seed << "\n# rng=" << set.rng << "\n";
  out << "i,p_i,dp_L";
  for (const auto& b : c.buses) out << ",zeta_d_" << b.id;
  for (const auto& b : c.buses) out << ",zeta_h_" << b.id;
  for (const auto& w : c.dibr) out << ",pbar_" << w.id;
  out << "\n";
  for (const auto& s : set.scenarios) {
    out << s.index << ',' << format_double(s.prob) << ',' << format_double(s.dp_load);
    for (double v : s.zeta_d) out << ',' << format_double(v);
    for (double v : s.zeta_h) out << ',' << format_double(v);
    for (double v : s.pbar) out << ',' << format_double(v);
    out << "\n";
  }
  return out.str();
}

namespace {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_no;
  std::vector<std::string> comments;
};

CsvTable read_csv(const std::string& text, const std::string& source) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    auto v = trim(line);
    if (v.empty()) continue;
    if (v.front() == '#') {
      t.comments.emplace_back(trim(v.substr(1)));
      continue;
    }
    auto cells = split(v, ',');
    for (auto& cell : cells) cell = std::string(trim(cell));
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw ParseError(source + ":" + std::to_string(no), "expected " + std::to_string(t.header.size()) + " columns");
    }
    t.rows.push_back(std::move(cells));
    t.line_no.push_back(no);
  }
  if (t.header.empty()) throw ParseError(source, "missing CSV header");
  return t;
}

}  // namespace

ScenarioSet scenarios_from_csv(const std::string& text, const GridCase& c, const std::string& source) {
  auto t = read_csv(text, source);
  auto col = [&](const std::string& name) -> std::size_t {
    auto it = std::find(t.header.begin(), t.header.end(), name);
    if (it == t.header.end()) throw ParseError(source + ":header", "missing column " + name);
    return static_cast<std::size_t>(it - t.header.begin());
  };
  const auto ci = col("i"), cp = col("p_i"), cdp = col("dp_L");
  std::vector<std::size_t> cd, ch, cw;
  for (const auto& b : c.buses) cd.push_back(col("zeta_d_" + std::to_string(b.id)));
  for (const auto& b : c.buses) ch.push_back(col("zeta_h_" + std::to_string(b.id)));
  for (const auto& w : c.dibr) cw.push_back(col("pbar_" + std::to_string(w.id)));

  ScenarioSet set;
  for (const auto& cm : t.comments) {
    if (cm.rfind("seed=", 0) == 0) set.seed = std::stoull(cm.substr(5));
    if (cm.rfind("rng=", 0) == 0) set.rng = cm.substr(4);
  }
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const auto where = source + ":" + std::to_string(t.line_no[r]);
    Scenario s;
    s.index = static_cast<std::size_t>(parse_double(row[ci], where));
    s.prob = parse_double(row[cp], where);
    for (auto k : cd) s.zeta_d.push_back(parse_double(row[k], where));
    for (auto k : ch) s.zeta_h.push_back(parse_double(row[k], where));
    for (auto k : cw) s.pbar.push_back(parse_double(row[k], where));
    s.dp_load = parse_double(row[cdp], where);
    if (s.dp_load != disturbance_of(s.zeta_d, s.zeta_h)) {
      throw ParseError(where, "dp_L does not equal the sum of zeta_d - zeta_h");
    }
    set.scenarios.push_back(std::move(s));
  }
  set.validate(c);
  return set;
}

void save_scenarios(const ScenarioSet& set, const GridCase& c, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write scenario file " + path.string());
  out << scenarios_to_csv(set, c);
}

ScenarioSet load_scenarios(const std::filesystem::path& path, const GridCase& c) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), "cannot open scenario file");
  std::stringstream ss;
  ss << in.rdbuf();
  return scenarios_from_csv(ss.str(), c, path.string());
}

UncertaintyModel fit_uncertainty_from_csv(const std::filesystem::path& path, const GridCase& c) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), "cannot open history file");
  std::stringstream ss;
  ss << in.rdbuf();
  auto t = read_csv(ss.str(), path.string());
  auto column = [&](const std::string& name) -> std::vector<double> {
    auto it = std::find(t.header.begin(), t.header.end(), name);
    if (it == t.header.end()) return {};
    const auto k = static_cast<std::size_t>(it - t.header.begin());
    std::vector<double> v;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      v.push_back(parse_double(t.rows[r][k], path.string() + ":" + std::to_string(t.line_no[r])));
    }
    return v;
  };
  // Support: observed range widened by 5% on each side so the sample extremes
  // keep positive density.
  auto fit = [](const std::vector<double>& x) {
    auto [mn, mx] = std::minmax_element(x.begin(), x.end());
    if (*mn == *mx) return BetaSpec::point(*mn);
    const double pad = 0.05 * (*mx - *mn);
    return fit_beta_moments(x, *mn - pad, *mx + pad);
  };
  auto m = UncertaintyModel::deterministic(c);
  for (std::size_t b = 0; b < c.buses.size(); ++b) {
    auto d = column("zeta_d_" + std::to_string(c.buses[b].id));
    if (!d.empty()) m.load_error[b] = fit(d);
    auto h = column("zeta_h_" + std::to_string(c.buses[b].id));
    if (!h.empty()) m.ibr_error[b] = fit(h);
  }
  for (std::size_t w = 0; w < c.dibr.size(); ++w) {
    auto x = column("pbar_" + std::to_string(c.dibr[w].id));
    if (x.empty()) continue;
    auto [mn, mx] = std::minmax_element(x.begin(), x.end());
    if (*mn == *mx) {
      m.dibr_available[w] = BetaSpec::point(*mn);
    } else {
      const double pad = 0.05 * (*mx - *mn);
      m.dibr_available[w] = fit_beta_moments(x, std::max(0.0, *mn - pad), std::min(c.dibr[w].capacity_mw, *mx + pad));
    }
  }
  m.validate(c);
  return m;
}

}  // namespace jced
