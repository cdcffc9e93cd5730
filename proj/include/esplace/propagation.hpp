#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <utility>
#include <vector>

#include "esplace/contact.hpp"
#include "esplace/csv.hpp"
#include "esplace/error.hpp"
#include "esplace/layout.hpp"
#include "esplace/scenario.hpp"

namespace esplace {

// Vehicles and servers of one snapshot, indexed for range queries.
// Node ids: vehicles 0..n-1 keep their snapshot ids, servers follow as n..n+k-1.
class Network {
 public:
  Network(const TrafficSnapshot& traffic, const ServerLayout& layout, const ConnectionTopology& topology,
          ContactRule rule)
      : rule_(rule), vehicle_count_(traffic.size()) {
    if (!(rule.range_m0 > 0.0)) throw Error(ErrorCode::InvalidParameter, "range must be > 0");
    nodes_.reserve(traffic.size() + layout.count());
    for (const auto& v : traffic.vehicles) nodes_.push_back({v.id, v.position_m, v.speed_mps, false});
    for (std::size_t i = 0; i < layout.count(); ++i)
      nodes_.push_back({static_cast<int>(vehicle_count_ + i), layout.positions_m[i], 0.0, true});

    by_position_.resize(nodes_.size());
    for (std::size_t i = 0; i < nodes_.size(); ++i) by_position_[i] = static_cast<int>(i);
    std::sort(by_position_.begin(), by_position_.end(), [&](int a, int b) {
      return std::pair(nodes_[a].position_m, a) < std::pair(nodes_[b].position_m, b);
    });
    sorted_x_.reserve(nodes_.size());
    for (int id : by_position_) sorted_x_.push_back(nodes_[id].position_m);
    for (const auto& n : nodes_) max_speed_ = std::max(max_speed_, std::abs(n.speed_mps));

    wired_.resize(layout.count());
    for (std::size_t x = 0; x < layout.count(); ++x)
      for (std::size_t y : direct_neighbors(layout, topology, x))
        wired_[x].push_back(static_cast<int>(vehicle_count_ + y));
  }

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const Node& node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const noexcept { return nodes_.size(); }
  std::size_t vehicle_count() const noexcept { return vehicle_count_; }
  const ContactRule& rule() const noexcept { return rule_; }

  // Node ids wired directly to a server node (empty for vehicles).
  const std::vector<int>& wired_neighbors(int id) const {
    static const std::vector<int> none;
    if (static_cast<std::size_t>(id) < vehicle_count_) return none;
    return wired_.at(static_cast<std::size_t>(id) - vehicle_count_);
  }

  // Calls fn(id) for every node that could come within range of `sender`
  // somewhere in [t_from, t0]. A superset; callers still test the contact.
  template <typename Fn>
  void for_each_candidate(const Node& sender, double t_from, Fn&& fn) const {
    const double t0 = rule_.delay_budget_s;
    const double a = sender.position_at(t_from);
    const double b = sender.position_at(t0);
    const double reach = rule_.range_m0 + max_speed_ * t0 + 1e-6 * (1.0 + rule_.range_m0);
    const double lo = std::min(a, b) - reach;
    const double hi = std::max(a, b) + reach;
    auto first = std::lower_bound(sorted_x_.begin(), sorted_x_.end(), lo);
    auto last = std::upper_bound(first, sorted_x_.end(), hi);
    for (auto it = first; it != last; ++it) {
      int id = by_position_[static_cast<std::size_t>(it - sorted_x_.begin())];
      if (id != sender.id) fn(id);
    }
  }

 private:
  ContactRule rule_;
  std::size_t vehicle_count_;
  std::vector<Node> nodes_;
  std::vector<int> by_position_;
  std::vector<double> sorted_x_;
  std::vector<std::vector<int>> wired_;
  double max_speed_ = 0.0;
};

struct Reception {
  int node;
  double time;

  friend bool operator==(const Reception&, const Reception&) = default;
};

// Nodes that get the message directly from `sender`, which holds it from t_i on.
// Wireless server recipients are capped at the nearest ones (by distance at t_i);
// wired neighbours of a server sender are added at t_i.
inline std::vector<Reception> reachable_set(const Network& net, int sender, double t_i) {
  const auto& rule = net.rule();
  if (t_i > rule.delay_budget_s || t_i < 0.0)
    throw Error(ErrorCode::InvalidWindow, "sender time outside [0, t0]");
  const Node& from = net.node(sender);
  const double here = from.position_at(t_i);

  std::vector<Reception> out;
  struct EsHit {
    double distance;
    int id;
    double time;
  };
  std::vector<EsHit> es_hits;

  net.for_each_candidate(from, t_i, [&](int id) {
    const Node& to = net.node(id);
    auto t = earliest_contact(from, to, t_i, rule);
    if (!t) return;
    if (to.is_es)
      es_hits.push_back({std::abs(to.position_m - here), id, *t});
    else
      out.push_back({id, *t});
  });

  if (rule.es_fanout_cap > 0 && es_hits.size() > static_cast<std::size_t>(rule.es_fanout_cap)) {
    auto keep = es_hits.begin() + rule.es_fanout_cap;
    std::partial_sort(es_hits.begin(), keep, es_hits.end(), [](const EsHit& a, const EsHit& b) {
      return std::pair(a.distance, a.id) < std::pair(b.distance, b.id);
    });
    es_hits.erase(keep, es_hits.end());
  }

  for (int peer : net.wired_neighbors(sender)) {
    auto it = std::find_if(es_hits.begin(), es_hits.end(), [&](const EsHit& h) { return h.id == peer; });
    if (it != es_hits.end())
      it->time = t_i + ContactRule::wired_delay_s;
    else
      es_hits.push_back({0.0, peer, t_i + ContactRule::wired_delay_s});
  }
  for (const auto& h : es_hits) out.push_back({h.id, h.time});

  std::sort(out.begin(), out.end(), [](const Reception& a, const Reception& b) { return a.node < b.node; });
  return out;
}

struct Witness {
  int parent;
  double contact_time;
};

struct DeliveryReport {
  std::vector<std::optional<double>> receive_time;  // by node id; empty = not reached
  std::vector<int> order;                           // settled nodes by (time, id)
  std::vector<std::optional<Witness>> witness;      // absent for the source
  std::size_t max_fanout = 0;                       // measured P(t0)

  bool delivered(int id) const { return receive_time.at(static_cast<std::size_t>(id)).has_value(); }
  std::size_t delivered_count() const noexcept { return order.size(); }
};

// Earliest receive time of every node. Label-setting over two cross-linked indexes:
// `by_time` orders tentative nodes by (time, id), `by_id` finds a node's entry in it.
inline DeliveryReport simulate(const Network& net, std::optional<int> source) {
  DeliveryReport rep;
  rep.receive_time.assign(net.size(), std::nullopt);
  rep.witness.assign(net.size(), std::nullopt);
  if (!source) return rep;
  if (*source < 0 || static_cast<std::size_t>(*source) >= net.size())
    throw Error(ErrorCode::InvalidParameter, "source is not a node of the network");

  using Entry = std::pair<double, int>;
  std::set<Entry> by_time;
  std::map<int, std::set<Entry>::iterator> by_id;
  std::vector<char> settled(net.size(), 0);
  std::vector<std::optional<Witness>> tentative_parent(net.size());

  by_id.emplace(*source, by_time.insert({0.0, *source}).first);

  while (!by_time.empty()) {
    const auto [t_i, c_i] = *by_time.begin();
    by_time.erase(by_time.begin());
    by_id.erase(c_i);
    settled[static_cast<std::size_t>(c_i)] = 1;
    rep.receive_time[static_cast<std::size_t>(c_i)] = t_i;
    rep.witness[static_cast<std::size_t>(c_i)] = tentative_parent[static_cast<std::size_t>(c_i)];
    rep.order.push_back(c_i);

    const auto reached = reachable_set(net, c_i, t_i);
    rep.max_fanout = std::max(rep.max_fanout, reached.size());
    for (const auto& [c_j, t_j] : reached) {
      if (settled[static_cast<std::size_t>(c_j)]) continue;
      auto found = by_id.find(c_j);
      if (found != by_id.end()) {
        if (!(t_j < found->second->first)) continue;
        by_time.erase(found->second);
        found->second = by_time.insert({t_j, c_j}).first;
      } else {
        by_id.emplace(c_j, by_time.insert({t_j, c_j}).first);
      }
      tentative_parent[static_cast<std::size_t>(c_j)] = Witness{c_i, t_j};
    }
  }
  return rep;
}

inline ContactRule contact_rule_for(const ValidatedParams& params) {
  ContactRule rule;
  rule.range_m0 = params.range();
  rule.delay_budget_s = params.delay_budget();
  rule.directional_forwarding = params.directional_forwarding();
  return rule;
}

struct EventOutcome {
  bool success = true;
  std::size_t window_vehicles = 0;    // n_D
  std::size_t window_delivered = 0;
  std::size_t max_fanout = 0;
};

// Vehicles (servers excluded) within distance D of the source at time 0, and how many of
// them the message reached.
inline EventOutcome evaluate_event(const Network& net, const DeliveryReport& rep, std::optional<int> source,
                                   double radius, double q) {
  EventOutcome out;
  out.max_fanout = rep.max_fanout;
  if (!source) return out;
  const double center = net.node(*source).position_m;
  for (std::size_t id = 0; id < net.vehicle_count(); ++id) {
    if (std::abs(net.nodes()[id].position_m - center) > radius) continue;
    ++out.window_vehicles;
    if (rep.receive_time[id]) ++out.window_delivered;
  }
  out.success = static_cast<double>(out.window_delivered) >= q * static_cast<double>(out.window_vehicles);
  return out;
}

// One Bernoulli trial: fresh traffic for (seed, trial_index), servers at spacing d,
// broadcast from the source; success iff at least q * n_D window vehicles receive it.
inline EventOutcome event_outcome(double spacing, const ValidatedParams& params, const ConnectionTopology& topology,
                                  std::uint64_t seed, std::uint64_t trial_index, int es_fanout_cap = 2) {
  if (!(spacing >= params.range()))
    throw Error(ErrorCode::SpacingBelowRange,
                "spacing " + std::to_string(spacing) + " below range " + std::to_string(params.range()));
  const auto traffic = generate_traffic(params, seed, trial_index);
  if (!traffic.source_id) return {};
  const auto layout = place_servers_by_spacing(params.length(), spacing);
  auto rule = contact_rule_for(params);
  rule.es_fanout_cap = es_fanout_cap;
  const Network net(traffic, layout, topology, rule);
  const auto rep = simulate(net, traffic.source_id);
  return evaluate_event(net, rep, traffic.source_id, params.radius(), params.q());
}

inline bool event_R(double spacing, const ValidatedParams& params, const ConnectionTopology& topology,
                    std::uint64_t seed, std::uint64_t trial_index) {
  return event_outcome(spacing, params, topology, seed, trial_index).success;
}

// node_id,is_es,receive_time_s,parent_id ; unreached nodes have empty time and parent.
inline void write_trace_csv(std::ostream& out, const Network& net, const DeliveryReport& rep) {
  csv::Writer w(out);
  w.row("node_id", "is_es", "receive_time_s", "parent_id");
  for (const auto& n : net.nodes()) {
    const auto& t = rep.receive_time[static_cast<std::size_t>(n.id)];
    const auto& parent = rep.witness[static_cast<std::size_t>(n.id)];
    w.row(n.id, n.is_es ? 1 : 0, t ? csv::number(*t) : std::string(),
          parent ? csv::number(parent->parent) : std::string());
  }
}

}  // namespace esplace
