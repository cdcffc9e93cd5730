#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "esplace/config.hpp"
#include "esplace/csv.hpp"
#include "esplace/error.hpp"
#include "esplace/metrics.hpp"
#include "esplace/optimizer.hpp"
#include "esplace/propagation.hpp"
#include "esplace/verify.hpp"

namespace esplace {

namespace cli_detail {

struct Flags {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> trials;
  std::optional<unsigned> workers;
  std::optional<std::string> output;
  std::vector<std::string> axis;
  std::vector<std::string> overrides;
};

inline void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "key=value configuration file");
  cmd->add_option("--seed", f.seed, "base seed");
  cmd->add_option("--trials", f.trials, "trials per cell");
  cmd->add_option("--workers", f.workers, "worker threads");
  cmd->add_option("--output", f.output, "output directory (default: stdout)");
  cmd->add_option("--set", f.overrides, "override one key: --set key=value")->allow_extra_args(false);
}

inline RunConfig resolve(const Flags& f) {
  RunConfig cfg = parse_config(f.config, f.overrides);
  if (f.seed) cfg.seed = *f.seed;
  if (f.trials) cfg.trials = *f.trials;
  if (f.workers) cfg.workers = *f.workers;
  if (f.output) cfg.output_path = *f.output;
  if (cfg.trials < 1) throw Error(ErrorCode::InvalidParameter, "trials must be >= 1");
  if (cfg.workers == 0) cfg.workers = 1;
  return cfg;
}

// Collects CSV outputs and writes them either into the output directory or to stdout.
class Outputs {
 public:
  Outputs(const RunConfig& cfg, std::ostream& out) : cfg_(cfg), out_(out) {}

  std::ostream& open(const std::string& name) {
    files_.push_back({name, std::make_unique<std::ostringstream>()});
    return *files_.back().second;
  }

  void note(const std::string& key, nlohmann::json value) { manifest_[key] = std::move(value); }

  void finish(const std::string& command, double seconds) {
    if (cfg_.output_path.empty()) {
      bool first = true;
      for (auto& [name, buf] : files_) {
        if (!first) out_ << '\n';
        first = false;
        out_ << buf->str();
      }
      return;
    }
    namespace fs = std::filesystem;
    const fs::path dir(cfg_.output_path);
    fs::create_directories(dir);
    nlohmann::json names = nlohmann::json::array();
    for (auto& [name, buf] : files_) {
      std::ofstream f(dir / name, std::ios::binary);
      f << buf->str();
      names.push_back(name);
    }
    {
      std::ofstream f(dir / "effective.cfg", std::ios::binary);
      f << echo_config(cfg_);
    }
    manifest_["command"] = command;
    manifest_["seed"] = cfg_.seed;
    manifest_["trials"] = cfg_.trials;
    manifest_["workers"] = cfg_.workers;
    manifest_["outputs"] = names;
    manifest_["wall_time_s"] = seconds;
    nlohmann::json effective = nlohmann::json::object();
    std::istringstream lines(echo_config(cfg_));
    for (std::string line; std::getline(lines, line);) {
      const auto eq = line.find('=');
      effective[line.substr(0, eq)] = line.substr(eq + 1);
    }
    manifest_["effective_config"] = effective;
    std::ofstream f(dir / "manifest.json", std::ios::binary);
    f << manifest_.dump(2) << '\n';
    out_ << "wrote " << files_.size() << " file(s) to " << dir.string() << '\n';
  }

 private:
  const RunConfig& cfg_;
  std::ostream& out_;
  std::vector<std::pair<std::string, std::unique_ptr<std::ostringstream>>> files_;
  nlohmann::json manifest_ = nlohmann::json::object();
};

inline std::optional<LayoutFactory> configured_layout(const RunConfig& cfg) {
  if (cfg.es_count) return layout_by_count(*cfg.es_count);
  if (cfg.es_spacing_m) return layout_by_spacing(*cfg.es_spacing_m);
  return std::nullopt;
}

inline LayoutFactory require_layout(const RunConfig& cfg) {
  auto f = configured_layout(cfg);
  if (!f) throw Error(ErrorCode::MissingKey, "es_count or es_spacing_m must be set");
  return *f;
}

// Broadcast on trial 0 to measure the largest direct fan-out, P(t0).
inline std::size_t probe_fanout(const ValidatedParams& params, const ServerLayout& layout, const RunConfig& cfg) {
  const auto traffic = generate_traffic(params, cfg.seed, 0);
  auto rule = contact_rule_for(params);
  rule.es_fanout_cap = cfg.es_fanout_cap;
  const Network net(traffic, layout, make_topology(cfg.topology), rule);
  return simulate(net, traffic.source_id).max_fanout;
}

inline void cmd_optimize(const RunConfig& cfg, Outputs& out) {
  const auto params = validate_params(cfg.scenario);
  RunOptions opts{cfg.workers, cfg.es_fanout_cap};
  const auto res = optimize_spacing(params, make_topology(cfg.topology), cfg.seed, opts);

  csv::Writer grid(out.open("optimize_grid.csv"));
  grid.row("grid_index", "spacing_m", "successes", "trials");
  for (std::size_t i = 0; i < res.grid.size(); ++i)
    grid.row(static_cast<std::int64_t>(i + 1), res.grid[i].spacing_m, res.grid[i].successes, res.grid[i].trials);

  csv::Writer summary(out.open("optimize_summary.csv"));
  summary.row("spacing_m", "h", "t", "delta", "grid_points", "event_calls", "terminated_by", "seed");
  summary.row(res.spacing_m, res.h, res.t, res.delta, static_cast<std::int64_t>(res.grid.size()), res.event_calls(),
              to_string(res.terminated_by), cfg.seed);
  out.note("measured_p_t0", res.max_fanout);
}

inline void cmd_simulate_once(const RunConfig& cfg, Outputs& out) {
  const auto params = validate_params(cfg.scenario);
  const auto layout = require_layout(cfg)(params);
  const auto traffic = generate_traffic(params, cfg.seed, 0);
  auto rule = contact_rule_for(params);
  rule.es_fanout_cap = cfg.es_fanout_cap;
  const Network net(traffic, layout, make_topology(cfg.topology), rule);
  const auto rep = simulate(net, traffic.source_id);
  const auto ev = evaluate_event(net, rep, traffic.source_id, params.radius(), params.q());

  write_trace_csv(out.open("trace.csv"), net, rep);
  csv::Writer summary(out.open("simulate_summary.csv"));
  summary.row("vehicles", "servers", "source_id", "delivered_nodes", "window_vehicles", "window_delivered",
              "event_success", "max_fanout", "seed");
  summary.row(static_cast<std::int64_t>(traffic.size()), static_cast<std::int64_t>(layout.count()),
              traffic.source_id ? csv::number(*traffic.source_id) : std::string(),
              static_cast<std::int64_t>(rep.delivered_count()), static_cast<std::int64_t>(ev.window_vehicles),
              static_cast<std::int64_t>(ev.window_delivered), ev.success ? 1 : 0,
              static_cast<std::int64_t>(rep.max_fanout), cfg.seed);
  out.note("measured_p_t0", rep.max_fanout);
}

inline SweepAxis parse_axis_key(const std::string& key) {
  if (key == "es_count") return SweepAxis::es_count;
  if (key == "vehicle_count") return SweepAxis::vehicle_count;
  if (key == "range_m0" || key == "m0_m") return SweepAxis::range_m0;
  if (key == "speed" || key == "speed_mps") return SweepAxis::speed;
  throw Error(ErrorCode::UnknownKey, "'" + key + "' is not a sweep axis");
}

inline void cmd_sweep(const RunConfig& cfg, const std::vector<std::string>& axes, Outputs& out) {
  if (axes.empty()) throw Error(ErrorCode::MissingKey, "sweep needs --axis KEY=v1,v2,...");
  const auto base = validate_params(cfg.scenario);
  std::size_t fanout = 0;
  for (const auto& spec : axes) {
    const config_detail::Source src{"--axis", 0};
    auto [key, values_text] = config_detail::split_assignment(spec, src);
    const auto axis = parse_axis_key(key);
    const auto values = config_detail::as_list(key, values_text, src);
    const auto rows = sweep(cfg.scenario, axis, values, configured_layout(cfg), cfg.seed, cfg.trials, cfg.workers);

    csv::Writer w(out.open("sweep_" + to_string(axis) + ".csv"));
    w.row("axis_value", "direct", "indirect", "total", "stderr_total", "trials", "seed");
    for (const auto& r : rows)
      w.row(r.axis_value, r.breakdown.direct, r.breakdown.indirect, r.breakdown.total, r.breakdown.stderr_total,
            r.breakdown.trials, cfg.seed);

    const auto layout = axis == SweepAxis::es_count
                            ? place_servers_by_count(base.length(), static_cast<std::int64_t>(values.back()))
                            : require_layout(cfg)(base);
    fanout = std::max(fanout, probe_fanout(base, layout, cfg));
  }
  out.note("measured_p_t0", fanout);
}

inline void cmd_compare(const RunConfig& cfg, Outputs& out) {
  const auto params = validate_params(cfg.scenario);
  const auto rows = baseline_compare(params, cfg.targets, cfg.seed, cfg.trials, cfg.workers);
  csv::Writer w(out.open("compare_baseline.csv"));
  w.row("target", "proposed_es", "baseline_es", "proposed_total", "baseline_direct", "trials", "seed");
  for (const auto& r : rows)
    w.row(r.target, r.proposed_es, r.baseline_es, r.proposed_total, r.baseline_direct, cfg.trials, cfg.seed);
  const std::int64_t probe = rows.empty() ? 0 : rows.back().proposed_es;
  out.note("measured_p_t0", probe_fanout(params, place_servers_by_count(params.length(), probe), cfg));
}

inline void cmd_calibrate(const RunConfig& cfg, Outputs& out) {
  if (!cfg.es_count) throw Error(ErrorCode::MissingKey, "calibrate needs es_count");
  validate_params(cfg.scenario);
  const auto res = calibrate_length(cfg.scenario, *cfg.es_count, cfg.calibration_target, cfg.calibration_length_lo_m,
                                    cfg.calibration_length_hi_m, cfg.seed, cfg.trials, cfg.workers);
  csv::Writer w(out.open("calibration.csv"));
  w.row("highway_length_m", "total", "es_count", "target", "iterations", "trials", "seed");
  w.row(res.highway_length_m, res.total, *cfg.es_count, cfg.calibration_target,
        static_cast<std::int64_t>(res.iterations), cfg.trials, cfg.seed);
  RunConfig fitted = cfg;
  fitted.scenario.highway_length_m = res.highway_length_m;
  fitted.output_path.clear();
  out.open("calibrated.cfg") << echo_config(fitted);
}

inline bool cmd_verify(const RunConfig& cfg, Outputs& out) {
  const auto rep = run_verification(cfg.seed);
  csv::Writer w(out.open("verify.csv"));
  w.row("property", "checked", "failures");
  for (const auto& p : rep.properties) w.row(p.name, p.checked, p.failures);
  out.note("measured_p_t0", rep.max_fanout);
  return rep.ok();
}

}  // namespace cli_detail

// Exit codes: 0 success, 1 invalid configuration or parameters, 2 runtime failure.
inline int run_command(const std::vector<std::string>& argv, std::ostream& out = std::cout,
                       std::ostream& err = std::cerr) {
  using namespace cli_detail;
  CLI::App app{"Edge-server spacing optimizer and highway propagation simulator", "esplace"};
  app.require_subcommand(1);
  Flags flags;
  auto* optimize = app.add_subcommand("optimize", "randomized search for the largest admissible spacing");
  auto* simulate_once = app.add_subcommand("simulate-once", "one broadcast on one snapshot; writes a trace");
  auto* sweep_cmd = app.add_subcommand("sweep", "connectivity breakdown along one or more axes");
  auto* compare = app.add_subcommand("compare-baseline", "server counts vs the relay-free baseline");
  auto* calibrate = app.add_subcommand("calibrate", "fit the highway length to a connectivity target");
  auto* verify = app.add_subcommand("verify", "oracle-equivalence, formula and monotonicity checks");
  for (auto* c : {optimize, simulate_once, sweep_cmd, compare, calibrate, verify}) add_common(c, flags);
  sweep_cmd->add_option("--axis", flags.axis, "KEY=v1,v2,... (es_count, vehicle_count, range_m0, speed)");

  std::vector<std::string> args(argv.rbegin(), argv.rend());
  if (!args.empty()) args.pop_back();  // program name
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "esplace: " << e.what() << '\n';
    return 1;
  }

  const auto started = std::chrono::steady_clock::now();
  try {
    const RunConfig cfg = resolve(flags);
    Outputs outputs(cfg, out);
    bool ok = true;
    std::string name;
    if (optimize->parsed()) { name = "optimize"; cmd_optimize(cfg, outputs); }
    else if (simulate_once->parsed()) { name = "simulate-once"; cmd_simulate_once(cfg, outputs); }
    else if (sweep_cmd->parsed()) { name = "sweep"; cmd_sweep(cfg, flags.axis, outputs); }
    else if (compare->parsed()) { name = "compare-baseline"; cmd_compare(cfg, outputs); }
    else if (calibrate->parsed()) { name = "calibrate"; cmd_calibrate(cfg, outputs); }
    else { name = "verify"; ok = cmd_verify(cfg, outputs); }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    outputs.finish(name, seconds);
    if (!ok) {
      err << "esplace: verification failed\n";
      return 2;
    }
    return 0;
  } catch (const Error& e) {
    err << "esplace: " << e.what() << '\n';
    return e.code() == ErrorCode::UnreachableTarget ? 2 : 1;
  } catch (const std::exception& e) {
    err << "esplace: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace esplace
