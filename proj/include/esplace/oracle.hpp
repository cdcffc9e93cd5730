#pragma once

// Brute-force reference computations used by `verify` and the test suites. They share
// no code path with the fast simulator beyond the Network container.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "esplace/contact.hpp"
#include "esplace/layout.hpp"
#include "esplace/propagation.hpp"
#include "esplace/rng.hpp"
#include "esplace/scenario.hpp"

namespace esplace::oracle {

// Earliest t in [t_start, t0] with (gap + closing t)^2 <= m0^2, from the quadratic's roots.
inline std::optional<double> contact_time(const Node& a, const Node& b, double t_start, const ContactRule& rule) {
  const double t0 = rule.delay_budget_s;
  const double m0 = rule.range_m0;
  const double r0 = b.position_m - a.position_m;
  const double w = b.speed_mps - a.speed_mps;

  double lo = t_start, hi = t0;
  const double qa = w * w;
  const double qb = 2.0 * r0 * w;
  const double qc = r0 * r0 - m0 * m0;
  if (qa == 0.0) {
    if (qc > 0.0) return std::nullopt;
  } else {
    const double disc = std::max(0.0, qb * qb - 4.0 * qa * qc);
    const double q = -0.5 * (qb + std::copysign(std::sqrt(disc), qb));
    double r1 = q / qa;
    double r2 = q != 0.0 ? qc / q : r1;
    if (r1 > r2) std::swap(r1, r2);
    lo = std::max(lo, r1);
    hi = std::min(hi, r2);
  }
  if (rule.directional_forwarding && b.is_es && !a.is_es) {
    // Heading toward b: sign(speed) * (b - a(t)) >= 0.
    if (a.speed_mps == 0.0) return std::nullopt;
    const double pass = r0 / a.speed_mps;
    hi = std::min(hi, pass);
  }
  if (lo > hi) return std::nullopt;
  return lo;
}

struct Labels {
  std::vector<std::optional<double>> time;
};

inline std::vector<std::vector<int>> wired_lists(const Network& net) {
  std::vector<std::vector<int>> out(net.size());
  for (std::size_t id = 0; id < net.size(); ++id) out[id] = net.wired_neighbors(static_cast<int>(id));
  return out;
}

// Capped wireless server set of `sender` at time t, by exhaustive scan.
inline std::vector<std::pair<int, double>> capped_receptions(const Network& net, int sender, double t) {
  const auto& rule = net.rule();
  const Node& from = net.node(sender);
  std::vector<std::pair<int, double>> vehicles, servers;
  for (const auto& to : net.nodes()) {
    if (to.id == sender) continue;
    auto c = contact_time(from, to, t, rule);
    if (!c) continue;
    (to.is_es ? servers : vehicles).push_back({to.id, *c});
  }
  if (rule.es_fanout_cap > 0 && servers.size() > static_cast<std::size_t>(rule.es_fanout_cap)) {
    const double here = from.position_m + from.speed_mps * t;
    std::sort(servers.begin(), servers.end(), [&](const auto& x, const auto& y) {
      const double dx = std::abs(net.node(x.first).position_m - here);
      const double dy = std::abs(net.node(y.first).position_m - here);
      return dx != dy ? dx < dy : x.first < y.first;
    });
    servers.resize(static_cast<std::size_t>(rule.es_fanout_cap));
  }
  vehicles.insert(vehicles.end(), servers.begin(), servers.end());
  return vehicles;
}

// Repeated relaxation to a fixpoint: every round relaxes every labelled node against every
// other node until no label improves. Exact when relaxations are monotone in the sender's
// time, i.e. with the server cap off, or with a fully wired topology.
inline Labels relaxation_labels(const Network& net, int source) {
  Labels out;
  out.time.assign(net.size(), std::nullopt);
  out.time[static_cast<std::size_t>(source)] = 0.0;
  const auto wired = wired_lists(net);
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t u = 0; u < net.size(); ++u) {
      if (!out.time[u]) continue;
      const double tu = *out.time[u];
      auto offer = [&](int v, double t) {
        auto& cur = out.time[static_cast<std::size_t>(v)];
        if (!cur || t < *cur) {
          cur = t;
          changed = true;
        }
      };
      for (const auto& [v, t] : capped_receptions(net, static_cast<int>(u), tu)) offer(v, t);
      for (int v : wired[u]) offer(v, tu);
    }
  }
  return out;
}

// Quadratic label-setting: pick the least (time, id) unsettled label by linear scan,
// relax from it by exhaustive scan. Handles the server cap under any topology.
inline Labels scan_labels(const Network& net, int source) {
  Labels out;
  out.time.assign(net.size(), std::nullopt);
  std::vector<std::optional<double>> tentative(net.size());
  std::vector<char> settled(net.size(), 0);
  tentative[static_cast<std::size_t>(source)] = 0.0;
  const auto wired = wired_lists(net);
  for (;;) {
    std::optional<std::size_t> pick;
    for (std::size_t v = 0; v < net.size(); ++v)
      if (!settled[v] && tentative[v] && (!pick || *tentative[v] < *tentative[*pick])) pick = v;
    if (!pick) break;
    const std::size_t u = *pick;
    settled[u] = 1;
    out.time[u] = tentative[u];
    const double tu = *tentative[u];
    auto offer = [&](int v, double t) {
      auto& cur = tentative[static_cast<std::size_t>(v)];
      if (!settled[static_cast<std::size_t>(v)] && (!cur || t < *cur)) cur = t;
    };
    for (const auto& [v, t] : capped_receptions(net, static_cast<int>(u), tu)) offer(v, t);
    for (int v : wired[u]) offer(v, tu);
  }
  return out;
}

struct Comparison {
  bool same_set = true;
  double max_time_error = 0.0;

  bool matches(double tolerance) const noexcept { return same_set && max_time_error <= tolerance; }
};

inline Comparison compare(const DeliveryReport& rep, const Labels& ref) {
  Comparison c;
  for (std::size_t v = 0; v < ref.time.size(); ++v) {
    const auto& a = rep.receive_time[v];
    const auto& b = ref.time[v];
    if (a.has_value() != b.has_value()) {
      c.same_set = false;
      continue;
    }
    if (a) c.max_time_error = std::max(c.max_time_error, std::abs(*a - *b));
  }
  return c;
}

// Uplink reference: a vehicle is connected iff a broadcast from it reaches any server.
struct UplinkReference {
  std::vector<char> direct;
  std::vector<char> connected;
};

inline UplinkReference uplink_by_broadcast(const TrafficSnapshot& traffic, const ServerLayout& layout,
                                           ContactRule rule) {
  rule.es_fanout_cap = 0;
  const Network net(traffic, layout, ConnectionTopology::unconnected(), rule);
  UplinkReference out;
  const std::size_t n = traffic.size();
  out.direct.assign(n, 0);
  out.connected.assign(n, 0);
  for (std::size_t v = 0; v < n; ++v) {
    for (const auto& to : net.nodes())
      if (to.is_es && contact_time(net.node(static_cast<int>(v)), to, 0.0, rule)) out.direct[v] = 1;
    const auto labels = scan_labels(net, static_cast<int>(v));
    for (std::size_t id = n; id < net.size(); ++id)
      if (labels.time[id]) out.connected[v] = 1;
  }
  return out;
}

// Random small instance: vehicles and arbitrarily placed servers on a short road.
struct Instance {
  TrafficSnapshot traffic;
  ServerLayout layout;
  ConnectionTopology topology = ConnectionTopology::connected();
  ContactRule rule;
};

inline Instance random_instance(std::uint64_t seed, std::size_t max_nodes = 50) {
  Rng rng(seed);
  Instance inst;
  const double length = rng.uniform(1000.0, 6000.0);
  const std::size_t total = 1 + static_cast<std::size_t>(rng.uniform01() * static_cast<double>(max_nodes));
  const std::size_t servers = static_cast<std::size_t>(rng.uniform01() * 0.4 * static_cast<double>(total));
  const std::size_t vehicles = std::max<std::size_t>(1, total - servers);
  for (std::size_t i = 0; i < vehicles; ++i) {
    double speed = rng.uniform(0.0, 40.0);
    if (rng.coin()) speed = -speed;
    if (rng.uniform01() < 0.1) speed = 0.0;
    inst.traffic.vehicles.push_back({static_cast<int>(i), rng.uniform(0.0, length), speed});
  }
  inst.traffic.source_id = static_cast<int>(rng.uniform01() * static_cast<double>(vehicles));
  for (std::size_t i = 0; i < servers; ++i) inst.layout.positions_m.push_back(rng.uniform(0.0, length));
  std::sort(inst.layout.positions_m.begin(), inst.layout.positions_m.end());
  inst.rule.range_m0 = rng.uniform(80.0, 400.0);
  inst.rule.delay_budget_s = rng.uniform(0.5, 60.0);
  inst.rule.directional_forwarding = rng.uniform01() < 0.3;
  inst.topology = rng.coin() ? ConnectionTopology::connected() : ConnectionTopology::unconnected();
  return inst;
}

}  // namespace esplace::oracle
