#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "esplace/csv.hpp"
#include "esplace/error.hpp"
#include "esplace/layout.hpp"
#include "esplace/parallel.hpp"
#include "esplace/scenario.hpp"

namespace esplace {

// Everything a command needs: scenario parameters plus run keys.
struct RunConfig {
  ScenarioParams scenario;
  std::optional<double> es_spacing_m;
  std::optional<std::int64_t> es_count;
  TopologyKind topology = TopologyKind::connected;
  std::int64_t trials = 1000;
  std::uint64_t seed = 1;
  unsigned workers = default_workers();
  std::string output_path;
  int es_fanout_cap = 2;
  std::vector<double> targets{0.5, 0.6, 0.7, 0.775};
  std::optional<double> bf_grid_factor;  // default: epsilon / 10
  std::int64_t bf_trials = 10000;
  double calibration_target = 0.775;
  double calibration_length_lo_m = 50000.0;
  double calibration_length_hi_m = 2000000.0;
};

namespace config_detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

struct Source {
  std::string origin;  // file path or "--set"
  int line;
};

inline std::string where(const Source& src) {
  return src.origin + ":" + std::to_string(src.line);
}

[[noreturn]] inline void type_error(const std::string& key, const std::string& value, const Source& src,
                                    const char* expected) {
  throw Error(ErrorCode::TypeError,
              "key '" + key + "' at " + where(src) + ": '" + value + "' is not " + expected);
}

inline double as_double(const std::string& key, const std::string& v, const Source& src) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty()) type_error(key, v, src, "a number");
  return out;
}

inline std::int64_t as_int(const std::string& key, const std::string& v, const Source& src) {
  std::int64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty()) type_error(key, v, src, "an integer");
  return out;
}

inline std::uint64_t as_uint(const std::string& key, const std::string& v, const Source& src) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty()) type_error(key, v, src, "an unsigned integer");
  return out;
}

inline bool as_bool(const std::string& key, const std::string& v, const Source& src) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  type_error(key, v, src, "a boolean");
}

inline std::vector<double> as_list(const std::string& key, const std::string& v, const Source& src) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(as_double(key, trim(item), src));
  if (out.empty()) type_error(key, v, src, "a comma-separated list of numbers");
  return out;
}

inline std::string canonical_key(const std::string& key) {
  if (key == "m0_m") return "range_m0";
  return key;
}

inline void apply(RunConfig& cfg, const std::string& raw_key, const std::string& v, const Source& src) {
  const std::string key = canonical_key(raw_key);
  auto& s = cfg.scenario;
  if (key == "highway_length_m") s.highway_length_m = as_double(key, v, src);
  else if (key == "range_m0") s.range_m0 = as_double(key, v, src);
  else if (key == "speed_min_mps") s.speed_min_mps = as_double(key, v, src);
  else if (key == "speed_max_mps") s.speed_max_mps = as_double(key, v, src);
  else if (key == "vehicle_count") { s.vehicle_count = as_int(key, v, src); s.density_per_km.reset(); }
  else if (key == "density_per_km") { s.density_per_km = as_double(key, v, src); s.vehicle_count.reset(); }
  else if (key == "delay_budget_s") s.delay_budget_s = as_double(key, v, src);
  else if (key == "message_radius_m") s.message_radius_m = as_double(key, v, src);
  else if (key == "target_fraction_q") s.target_fraction_q = as_double(key, v, src);
  else if (key == "target_prob_p") s.target_prob_p = as_double(key, v, src);
  else if (key == "gamma") s.gamma = as_double(key, v, src);
  else if (key == "epsilon") s.epsilon = as_double(key, v, src);
  else if (key == "lambda0") s.lambda0 = as_double(key, v, src);
  else if (key == "direction_mode") {
    if (v == "one-way") s.direction_mode = DirectionMode::one_way;
    else if (v == "two-way") s.direction_mode = DirectionMode::two_way;
    else type_error(key, v, src, "one-way or two-way");
  } else if (key == "directional_forwarding") s.directional_forwarding = as_bool(key, v, src);
  else if (key == "position_law") {
    if (v == "uniform") s.position_law = PositionLaw::uniform;
    else if (v == "poisson") s.position_law = PositionLaw::poisson;
    else type_error(key, v, src, "uniform or poisson");
  } else if (key == "es_spacing_m") { cfg.es_spacing_m = as_double(key, v, src); cfg.es_count.reset(); }
  else if (key == "es_count") { cfg.es_count = as_int(key, v, src); cfg.es_spacing_m.reset(); }
  else if (key == "topology") {
    if (v == "connected") cfg.topology = TopologyKind::connected;
    else if (v == "unconnected") cfg.topology = TopologyKind::unconnected;
    else type_error(key, v, src, "connected or unconnected");
  } else if (key == "trials") cfg.trials = as_int(key, v, src);
  else if (key == "seed") cfg.seed = as_uint(key, v, src);
  else if (key == "workers") cfg.workers = static_cast<unsigned>(as_uint(key, v, src));
  else if (key == "output_path") cfg.output_path = v;
  else if (key == "es_fanout_cap") cfg.es_fanout_cap = static_cast<int>(as_int(key, v, src));
  else if (key == "targets") cfg.targets = as_list(key, v, src);
  else if (key == "bf_grid_factor") cfg.bf_grid_factor = as_double(key, v, src);
  else if (key == "bf_trials") cfg.bf_trials = as_int(key, v, src);
  else if (key == "calibration_target") cfg.calibration_target = as_double(key, v, src);
  else if (key == "calibration_length_lo_m") cfg.calibration_length_lo_m = as_double(key, v, src);
  else if (key == "calibration_length_hi_m") cfg.calibration_length_hi_m = as_double(key, v, src);
  else throw Error(ErrorCode::UnknownKey, "'" + raw_key + "' at " + where(src));
}

// Splits "key=value"; a missing key or '=' is reported against its source.
inline std::pair<std::string, std::string> split_assignment(std::string_view text, const Source& src) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos)
    throw Error(ErrorCode::TypeError, where(src) + ": expected key=value, got '" + std::string(text) + "'");
  std::string key = trim(text.substr(0, eq));
  if (key.empty()) throw Error(ErrorCode::MissingKey, where(src) + ": assignment without a key");
  return {key, trim(text.substr(eq + 1))};
}

}  // namespace config_detail

// Parses key=value lines ('#' starts a comment) into `cfg`. Later keys win.
inline void apply_config_text(RunConfig& cfg, std::string_view text, const std::string& origin) {
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (config_detail::trim(line).empty()) continue;
    const config_detail::Source src{origin, lineno};
    auto [key, value] = config_detail::split_assignment(line, src);
    config_detail::apply(cfg, key, value, src);
  }
}

// Config file (optional) merged with --set overrides; overrides win.
inline RunConfig parse_config(const std::optional<std::string>& path, const std::vector<std::string>& overrides = {}) {
  RunConfig cfg;
  if (path) {
    std::ifstream in(*path);
    if (!in) throw Error(ErrorCode::InvalidParameter, "cannot read config file '" + *path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    apply_config_text(cfg, buf.str(), *path);
  }
  int index = 0;
  for (const auto& o : overrides) {
    const config_detail::Source src{"--set", ++index};
    auto [key, value] = config_detail::split_assignment(o, src);
    config_detail::apply(cfg, key, value, src);
  }
  return cfg;
}

inline std::string list_text(const std::vector<double>& values) {
  std::string out;
  for (double v : values) {
    if (!out.empty()) out += ',';
    out += csv::number(v);
  }
  return out;
}

// Effective configuration in the same key=value syntax; parsing it back gives the same run.
inline std::string echo_config(const RunConfig& cfg) {
  const auto& s = cfg.scenario;
  std::ostringstream out;
  auto kv = [&](const char* key, const std::string& value) { out << key << '=' << value << '\n'; };
  kv("highway_length_m", csv::number(s.highway_length_m));
  kv("range_m0", csv::number(s.range_m0));
  kv("speed_min_mps", csv::number(s.speed_min_mps));
  kv("speed_max_mps", csv::number(s.speed_max_mps));
  if (s.density_per_km)
    kv("density_per_km", csv::number(*s.density_per_km));
  else
    kv("vehicle_count", csv::number(s.vehicle_count.value_or(ScenarioParams::default_vehicle_count)));
  kv("delay_budget_s", csv::number(s.delay_budget_s));
  kv("message_radius_m", csv::number(s.message_radius_m));
  kv("target_fraction_q", csv::number(s.target_fraction_q));
  kv("target_prob_p", csv::number(s.target_prob_p));
  kv("gamma", csv::number(s.gamma));
  kv("epsilon", csv::number(s.epsilon));
  kv("lambda0", csv::number(s.lambda0));
  kv("direction_mode", s.direction_mode == DirectionMode::two_way ? "two-way" : "one-way");
  kv("directional_forwarding", s.directional_forwarding ? "true" : "false");
  kv("position_law", s.position_law == PositionLaw::uniform ? "uniform" : "poisson");
  if (cfg.es_spacing_m) kv("es_spacing_m", csv::number(*cfg.es_spacing_m));
  if (cfg.es_count) kv("es_count", csv::number(*cfg.es_count));
  kv("topology", to_string(cfg.topology));
  kv("trials", csv::number(cfg.trials));
  kv("seed", csv::number(cfg.seed));
  kv("workers", std::to_string(cfg.workers));
  if (!cfg.output_path.empty()) kv("output_path", cfg.output_path);
  kv("es_fanout_cap", std::to_string(cfg.es_fanout_cap));
  kv("targets", list_text(cfg.targets));
  if (cfg.bf_grid_factor) kv("bf_grid_factor", csv::number(*cfg.bf_grid_factor));
  kv("bf_trials", csv::number(cfg.bf_trials));
  kv("calibration_target", csv::number(cfg.calibration_target));
  kv("calibration_length_lo_m", csv::number(cfg.calibration_length_lo_m));
  kv("calibration_length_hi_m", csv::number(cfg.calibration_length_hi_m));
  return out.str();
}

inline ConnectionTopology make_topology(TopologyKind kind) {
  return kind == TopologyKind::unconnected ? ConnectionTopology::unconnected() : ConnectionTopology::connected();
}

}  // namespace esplace
