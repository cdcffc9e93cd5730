#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "esplace/error.hpp"
#include "esplace/layout.hpp"
#include "esplace/parallel.hpp"
#include "esplace/propagation.hpp"
#include "esplace/scenario.hpp"

namespace esplace {

// Per-snapshot uplink classification of every vehicle.
//   direct:   reaches a server in one wireless hop within t0
//   indirect: reaches a server within t0 only through vehicle relays
struct UplinkClassification {
  std::vector<char> direct;     // by vehicle id
  std::vector<char> connected;  // direct or indirect
  std::size_t n_direct = 0;
  std::size_t n_indirect = 0;
};

// Latest-departure labelling run backwards from the servers: deadline[v] is the latest
// time v can still hold the message and get it to some server by t0. A vehicle is
// connected iff its deadline is >= 0. Hops only ever shrink the deadline, so settling the
// largest deadline first is exact.
inline UplinkClassification classify_uplink(const Network& net) {
  const std::size_t n = net.vehicle_count();
  const auto& rule = net.rule();
  constexpr double unreachable = -std::numeric_limits<double>::infinity();

  UplinkClassification out;
  out.direct.assign(n, 0);
  out.connected.assign(n, 0);
  std::vector<double> deadline(n, unreachable);

  for (std::size_t v = 0; v < n; ++v) {
    const Node& from = net.nodes()[v];
    net.for_each_candidate(from, 0.0, [&](int id) {
      const Node& to = net.node(id);
      if (!to.is_es) return;
      if (auto w = contact_window(from, to, rule)) {
        out.direct[v] = 1;
        deadline[v] = std::max(deadline[v], w->hi);
      }
    });
  }

  using Item = std::pair<double, int>;
  std::priority_queue<Item> heap;
  for (std::size_t v = 0; v < n; ++v)
    if (out.direct[v]) heap.push({deadline[v], static_cast<int>(v)});
  std::vector<char> settled(n, 0);

  while (!heap.empty()) {
    const auto [limit, u] = heap.top();
    heap.pop();
    if (settled[static_cast<std::size_t>(u)] || limit < deadline[static_cast<std::size_t>(u)]) continue;
    settled[static_cast<std::size_t>(u)] = 1;
    const Node& holder = net.node(u);
    net.for_each_candidate(holder, 0.0, [&](int id) {
      if (static_cast<std::size_t>(id) >= n || settled[static_cast<std::size_t>(id)]) return;
      auto w = contact_window(net.node(id), holder, rule);
      if (!w) return;
      const double handoff = std::min(w->hi, limit);
      if (handoff < w->lo || handoff <= deadline[static_cast<std::size_t>(id)]) return;
      deadline[static_cast<std::size_t>(id)] = handoff;
      heap.push({handoff, id});
    });
  }

  for (std::size_t v = 0; v < n; ++v) {
    out.connected[v] = deadline[v] >= 0.0 ? 1 : 0;
    if (out.direct[v])
      ++out.n_direct;
    else if (out.connected[v])
      ++out.n_indirect;
  }
  return out;
}

struct TrialCounts {
  std::size_t n_vehicles = 0;
  std::size_t n_direct = 0;
  std::size_t n_indirect = 0;

  double direct_fraction() const noexcept {
    return n_vehicles ? static_cast<double>(n_direct) / static_cast<double>(n_vehicles) : 0.0;
  }
  double indirect_fraction() const noexcept {
    return n_vehicles ? static_cast<double>(n_indirect) / static_cast<double>(n_vehicles) : 0.0;
  }
};

inline TrialCounts connectivity_trial(const TrafficSnapshot& traffic, const ServerLayout& layout,
                                      const ContactRule& rule) {
  const Network net(traffic, layout, ConnectionTopology::unconnected(), rule);
  const auto cls = classify_uplink(net);
  return {traffic.size(), cls.n_direct, cls.n_indirect};
}

struct ConnectivityBreakdown {
  double direct = 0.0;
  double indirect = 0.0;
  double total = 0.0;  // direct + indirect
  double stderr_total = 0.0;
  std::size_t n_vehicles = 0;  // summed over trials
  std::size_t n_delivered_direct = 0;
  std::size_t n_delivered_indirect = 0;
  std::int64_t trials = 0;
};

inline ConnectivityBreakdown aggregate(const std::vector<TrialCounts>& per_trial) {
  ConnectivityBreakdown b;
  b.trials = static_cast<std::int64_t>(per_trial.size());
  if (per_trial.empty()) return b;
  double sum_d = 0.0, sum_i = 0.0;
  std::vector<double> totals;
  totals.reserve(per_trial.size());
  for (const auto& c : per_trial) {
    const double d = c.direct_fraction();
    const double i = c.indirect_fraction();
    sum_d += d;
    sum_i += i;
    totals.push_back(d + i);
    b.n_vehicles += c.n_vehicles;
    b.n_delivered_direct += c.n_direct;
    b.n_delivered_indirect += c.n_indirect;
  }
  const double n = static_cast<double>(per_trial.size());
  b.direct = sum_d / n;
  b.indirect = sum_i / n;
  b.total = b.direct + b.indirect;
  if (per_trial.size() > 1) {
    double mean = 0.0;
    for (double t : totals) mean += t;
    mean /= n;
    double ss = 0.0;
    for (double t : totals) ss += (t - mean) * (t - mean);
    b.stderr_total = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return b;
}

using LayoutFactory = std::function<ServerLayout(const ValidatedParams&)>;

inline LayoutFactory layout_by_count(std::int64_t es_count) {
  return [es_count](const ValidatedParams& p) { return place_servers_by_count(p.length(), es_count); };
}

inline LayoutFactory layout_by_spacing(double spacing) {
  return [spacing](const ValidatedParams& p) { return place_servers_by_spacing(p.length(), spacing); };
}

// Trial k uses snapshot (seed, k), so different layouts or ranges see the same traffic.
inline std::vector<TrialCounts> connectivity_trials(const ValidatedParams& params, const ServerLayout& layout,
                                                    std::uint64_t seed, std::int64_t trials, unsigned workers = 1) {
  if (trials < 1) throw Error(ErrorCode::InvalidParameter, "trials must be >= 1");
  const auto rule = contact_rule_for(params);
  return parallel_map(static_cast<std::size_t>(trials), workers, [&](std::size_t k) {
    return connectivity_trial(generate_traffic(params, seed, k), layout, rule);
  });
}

inline ConnectivityBreakdown connectivity_breakdown(const ValidatedParams& params, std::int64_t es_count,
                                                    std::uint64_t seed, std::int64_t trials, unsigned workers = 1) {
  const auto layout = place_servers_by_count(params.length(), es_count);
  return aggregate(connectivity_trials(params, layout, seed, trials, workers));
}

enum class SweepAxis { es_count, vehicle_count, range_m0, speed };

inline std::string to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::es_count: return "es_count";
    case SweepAxis::vehicle_count: return "vehicle_count";
    case SweepAxis::range_m0: return "range_m0";
    case SweepAxis::speed: return "speed";
  }
  return "";
}

struct SweepRow {
  double axis_value;
  ConnectivityBreakdown breakdown;
};

// One breakdown per axis value. Axes other than es_count keep the servers given by
// `layout` (a count or a spacing re-evaluated against each cell's parameters); the speed
// axis pins every vehicle to that exact speed.
inline std::vector<SweepRow> sweep(const ScenarioParams& base, SweepAxis axis, const std::vector<double>& values,
                                   const std::optional<LayoutFactory>& layout, std::uint64_t seed,
                                   std::int64_t trials, unsigned workers = 1) {
  if (values.empty()) throw Error(ErrorCode::InvalidParameter, "sweep axis has no values");
  if (axis != SweepAxis::es_count && !layout)
    throw Error(ErrorCode::MissingKey, "es_count or es_spacing_m is required for a " + to_string(axis) + " sweep");

  std::vector<SweepRow> rows;
  rows.reserve(values.size());
  for (double value : values) {
    ScenarioParams raw = base;
    LayoutFactory make = layout ? *layout : LayoutFactory{};
    switch (axis) {
      case SweepAxis::es_count:
        if (value < 0 || value != std::floor(value))
          throw Error(ErrorCode::InvalidParameter, "es_count axis values must be non-negative integers");
        make = layout_by_count(static_cast<std::int64_t>(value));
        break;
      case SweepAxis::vehicle_count:
        if (value < 0 || value != std::floor(value))
          throw Error(ErrorCode::InvalidParameter, "vehicle_count axis values must be non-negative integers");
        raw.vehicle_count = static_cast<std::int64_t>(value);
        raw.density_per_km.reset();
        break;
      case SweepAxis::range_m0:
        raw.range_m0 = value;
        break;
      case SweepAxis::speed:
        raw.speed_min_mps = value;
        raw.speed_max_mps = value;
        break;
    }
    const auto params = validate_params(raw);
    rows.push_back({value, aggregate(connectivity_trials(params, make(params), seed, trials, workers))});
  }
  return rows;
}

struct BaselineRow {
  double target = 0.0;
  std::int64_t proposed_es = 0;  // relays allowed (total connectivity)
  std::int64_t baseline_es = 0;  // direct coverage only
  double proposed_total = 0.0;
  double baseline_direct = 0.0;
};

// Server count past which every point of the highway is within m0 of a server.
inline std::int64_t dense_es_count(const ValidatedParams& params) {
  return static_cast<std::int64_t>(std::ceil(params.length() / (2.0 * params.range()))) + 1;
}

// Least server count meeting each connectivity target, for the relaying scheme and for
// the relay-free coverage baseline. Both searches bisect over the same cached breakdowns.
inline std::vector<BaselineRow> baseline_compare(const ValidatedParams& params, const std::vector<double>& targets,
                                                 std::uint64_t seed, std::int64_t trials, unsigned workers = 1) {
  std::map<std::int64_t, ConnectivityBreakdown> cache;
  auto at = [&](std::int64_t k) -> const ConnectivityBreakdown& {
    auto it = cache.find(k);
    if (it == cache.end()) it = cache.emplace(k, connectivity_breakdown(params, k, seed, trials, workers)).first;
    return it->second;
  };
  const std::int64_t dense = dense_es_count(params);

  auto least = [&](double target, auto metric) -> std::int64_t {
    if (target <= 0.0) return 0;
    if (metric(at(dense)) < target)
      throw Error(ErrorCode::UnreachableTarget,
                  "target " + std::to_string(target) + " not met even with " + std::to_string(dense) + " servers");
    std::int64_t lo = 0, hi = dense;
    while (lo < hi) {
      const std::int64_t mid = lo + (hi - lo) / 2;
      if (metric(at(mid)) >= target)
        hi = mid;
      else
        lo = mid + 1;
    }
    return lo;
  };

  std::vector<BaselineRow> rows;
  for (double target : targets) {
    if (!(target >= 0.0 && target <= 1.0))
      throw Error(ErrorCode::InvalidParameter, "targets must lie in [0, 1]");
    BaselineRow row;
    row.target = target;
    row.proposed_es = least(target, [](const ConnectivityBreakdown& b) { return b.total; });
    row.baseline_es = least(target, [](const ConnectivityBreakdown& b) { return b.direct; });
    row.proposed_total = at(row.proposed_es).total;
    row.baseline_direct = at(row.baseline_es).direct;
    rows.push_back(row);
  }
  return rows;
}

struct CalibrationResult {
  double highway_length_m = 0.0;
  double total = 0.0;
  int iterations = 0;
};

// Bisects the highway length so that the total connectivity at `es_count` servers
// lands on `target`. Total connectivity falls as the same servers and vehicles are
// spread over a longer road.
inline CalibrationResult calibrate_length(const ScenarioParams& base, std::int64_t es_count, double target,
                                          double length_lo, double length_hi, std::uint64_t seed,
                                          std::int64_t trials, unsigned workers = 1, double tolerance_m = 1.0) {
  if (!(length_lo > 0.0 && length_lo < length_hi))
    throw Error(ErrorCode::InvalidParameter, "calibration bracket must satisfy 0 < lo < hi");
  auto total_at = [&](double length) {
    ScenarioParams raw = base;
    raw.highway_length_m = length;
    return connectivity_breakdown(validate_params(raw), es_count, seed, trials, workers).total;
  };
  CalibrationResult res;
  double lo = length_lo, hi = length_hi;
  while (hi - lo > tolerance_m && res.iterations < 64) {
    const double mid = std::round(0.5 * (lo + hi));
    if (mid <= lo || mid >= hi) break;
    if (total_at(mid) >= target)
      lo = mid;
    else
      hi = mid;
    ++res.iterations;
  }
  const double tl = total_at(lo), th = total_at(hi);
  res.highway_length_m = std::abs(tl - target) <= std::abs(th - target) ? lo : hi;
  res.total = res.highway_length_m == lo ? tl : th;
  return res;
}

}  // namespace esplace
