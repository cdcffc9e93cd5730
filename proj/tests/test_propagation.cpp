#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <sstream>

#include "esplace/oracle.hpp"
#include "esplace/propagation.hpp"

using namespace esplace;

namespace {

TrafficSnapshot static_traffic(const std::vector<double>& xs, int source = 0) {
  TrafficSnapshot t;
  for (std::size_t i = 0; i < xs.size(); ++i) t.vehicles.push_back({static_cast<int>(i), xs[i], 0.0});
  t.source_id = source;
  return t;
}

ContactRule rule(double m0, double t0) {
  ContactRule r;
  r.range_m0 = m0;
  r.delay_budget_s = t0;
  return r;
}

ServerLayout servers_at(std::vector<double> xs) {
  ServerLayout l;
  l.positions_m = std::move(xs);
  return l;
}

}  // namespace

TEST(ReachableSet, IsolatedSenderReachesNobody) {
  TrafficSnapshot t;
  t.vehicles = {{0, 0.0, -30.0}, {1, 1000.0, 30.0}, {2, 3000.0, 25.0}};
  t.source_id = 0;
  const Network net(t, {}, ConnectionTopology::connected(), rule(200, 60));
  EXPECT_TRUE(reachable_set(net, 0, 0.0).empty());
}

TEST(ReachableSet, ConnectedServerChainPassesToBothNeighbours) {
  TrafficSnapshot t;
  t.vehicles = {{0, 0.0, 0.0}};
  const auto layout = place_servers_by_count(5000, 5);  // 500, 1500, ..., 4500
  const Network net(t, layout, ConnectionTopology::connected(), rule(200, 60));
  const int middle = 1 + 2;
  const auto got = reachable_set(net, middle, 0.0);
  EXPECT_EQ(got, (std::vector<Reception>{{2, 0.0}, {4, 0.0}}));

  const Network isolated(t, layout, ConnectionTopology::unconnected(), rule(200, 60));
  EXPECT_TRUE(reachable_set(isolated, middle, 0.0).empty());
}

TEST(ReachableSet, StaticNodesOnlyWithinRange) {
  const Network net(static_traffic({0, 150, 400}), {}, ConnectionTopology::connected(), rule(200, 60));
  EXPECT_EQ(reachable_set(net, 0, 5.0), (std::vector<Reception>{{1, 5.0}}));
}

TEST(ReachableSet, WirelessServerFanOutIsCapped) {
  // Five servers within range of one vehicle; only the two nearest receive over the air.
  TrafficSnapshot t;
  t.vehicles = {{0, 1000.0, 0.0}};
  const auto layout = servers_at({850, 930, 1010, 1100, 1190});
  const Network capped(t, layout, ConnectionTopology::unconnected(), rule(200, 60));
  EXPECT_EQ(reachable_set(capped, 0, 0.0), (std::vector<Reception>{{2, 0.0}, {3, 0.0}}));

  auto open_rule = rule(200, 60);
  open_rule.es_fanout_cap = 0;
  const Network open(t, layout, ConnectionTopology::unconnected(), open_rule);
  EXPECT_EQ(reachable_set(open, 0, 0.0).size(), 5u);
}

TEST(Simulate, SourceOnly) {
  const Network net(static_traffic({500}), {}, ConnectionTopology::connected(), rule(200, 60));
  const auto rep = simulate(net, 0);
  EXPECT_EQ(rep.order, std::vector<int>{0});
  EXPECT_EQ(rep.receive_time[0], 0.0);
  EXPECT_FALSE(rep.witness[0]);
}

TEST(Simulate, StaticChainDeliversInstantlyOverThreeHops) {
  const Network net(static_traffic({0, 150, 300, 450}), {}, ConnectionTopology::connected(), rule(200, 1e6));
  const auto rep = simulate(net, 0);
  EXPECT_EQ(rep.order, (std::vector<int>{0, 1, 2, 3}));
  for (int v = 0; v < 4; ++v) EXPECT_EQ(rep.receive_time[v], 0.0);
  EXPECT_EQ(rep.witness[3]->parent, 2);
  EXPECT_EQ(rep.witness[2]->parent, 1);
  EXPECT_EQ(rep.witness[1]->parent, 0);
}

TEST(Simulate, StoreCarryForwardWaitsForContact) {
  // The source drives toward a parked car 1 km away and hands over on entering range.
  TrafficSnapshot t;
  t.vehicles = {{0, 0.0, 20.0}, {1, 1000.0, 0.0}};
  t.source_id = 0;
  const Network net(t, {}, ConnectionTopology::connected(), rule(200, 60));
  const auto rep = simulate(net, 0);
  ASSERT_TRUE(rep.receive_time[1]);
  EXPECT_NEAR(*rep.receive_time[1], 40.0, 1e-12);
  const Network short_budget(t, {}, ConnectionTopology::connected(), rule(200, 30));
  EXPECT_FALSE(simulate(short_budget, 0).receive_time[1]);
}

TEST(Simulate, WiredServersRelayInstantly) {
  // Source near server 0; a car sits next to the far server 4 km away.
  const auto traffic = static_traffic({100, 4100});
  const auto layout = servers_at({0, 2000, 4000});
  const Network wired(traffic, layout, ConnectionTopology::connected(), rule(200, 60));
  const auto rep = simulate(wired, 0);
  EXPECT_EQ(rep.receive_time[1], 0.0);
  EXPECT_EQ(rep.witness[1]->parent, 2 + 2);

  const Network isolated(traffic, layout, ConnectionTopology::unconnected(), rule(200, 60));
  EXPECT_FALSE(simulate(isolated, 0).receive_time[1]);
}

TEST(Simulate, MatchesOraclesOnRandomInstances) {
  int wired = 0, unwired = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    auto inst = oracle::random_instance(1000 + s);
    const Network net(inst.traffic, inst.layout, inst.topology, inst.rule);
    const auto rep = simulate(net, inst.traffic.source_id);
    const auto scan = oracle::compare(rep, oracle::scan_labels(net, *inst.traffic.source_id));
    EXPECT_TRUE(scan.matches(1e-9)) << "instance " << s << " err " << scan.max_time_error;

    auto open_rule = inst.rule;
    open_rule.es_fanout_cap = 0;
    const Network open(inst.traffic, inst.layout, inst.topology, open_rule);
    const auto relax =
        oracle::compare(simulate(open, inst.traffic.source_id), oracle::relaxation_labels(open, *inst.traffic.source_id));
    EXPECT_TRUE(relax.matches(1e-9)) << "instance " << s;

    if (inst.topology.kind() == TopologyKind::connected) {
      ++wired;
      // Fully wired servers make the capped relaxation monotone too.
      EXPECT_TRUE(oracle::compare(rep, oracle::relaxation_labels(net, *inst.traffic.source_id)).matches(1e-9));
    } else {
      ++unwired;
    }
  }
  EXPECT_GT(wired, 50);
  EXPECT_GT(unwired, 50);
}

TEST(Simulate, ReportInvariantsHold) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    auto inst = oracle::random_instance(5000 + s);
    const Network net(inst.traffic, inst.layout, inst.topology, inst.rule);
    const auto rep = simulate(net, inst.traffic.source_id);
    ASSERT_EQ(rep.order.front(), *inst.traffic.source_id);
    for (std::size_t i = 1; i < rep.order.size(); ++i) {
      const int a = rep.order[i - 1], b = rep.order[i];
      EXPECT_LE(*rep.receive_time[a], *rep.receive_time[b]);
    }
    for (int v : rep.order) {
      if (v == *inst.traffic.source_id) continue;
      const auto& w = rep.witness[v];
      ASSERT_TRUE(w);
      const double tp = *rep.receive_time[w->parent];
      EXPECT_GE(*rep.receive_time[v], tp);
      EXPECT_EQ(w->contact_time, *rep.receive_time[v]);
      const auto& wired = net.wired_neighbors(w->parent);
      const bool by_wire = std::find(wired.begin(), wired.end(), v) != wired.end() && w->contact_time == tp;
      const auto replay = earliest_contact(net.node(w->parent), net.node(v), tp, net.rule());
      EXPECT_TRUE(by_wire || (replay && *replay == w->contact_time)) << "instance " << s << " node " << v;
    }
  }
}

TEST(Simulate, MonotoneInInfrastructureAndRange) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    auto inst = oracle::random_instance(9000 + s);
    auto open_rule = inst.rule;
    open_rule.es_fanout_cap = 0;
    auto few = inst.layout;
    if (!few.positions_m.empty()) few.positions_m.erase(few.positions_m.begin() + static_cast<long>(s % few.count()));
    // Unconnected servers so that dropping one does not renumber wiring.
    const Network a(inst.traffic, few, ConnectionTopology::unconnected(), open_rule);
    const Network b(inst.traffic, inst.layout, ConnectionTopology::unconnected(), open_rule);
    const auto ra = simulate(a, inst.traffic.source_id), rb = simulate(b, inst.traffic.source_id);
    for (std::size_t v = 0; v < inst.traffic.size(); ++v)
      if (ra.receive_time[v]) {
        EXPECT_TRUE(rb.receive_time[v]) << s;
      }

    auto wide = inst.rule;
    wide.range_m0 *= 1.5;
    const Network narrow_net(inst.traffic, inst.layout, inst.topology, inst.rule);
    const Network wide_net(inst.traffic, inst.layout, inst.topology, wide);
    if (inst.topology.kind() != TopologyKind::connected) continue;
    const auto rn = simulate(narrow_net, inst.traffic.source_id), rw = simulate(wide_net, inst.traffic.source_id);
    for (std::size_t v = 0; v < rn.receive_time.size(); ++v)
      if (rn.receive_time[v]) {
        EXPECT_TRUE(rw.receive_time[v]) << s;
      }
  }
}

TEST(EventR, ZeroFractionAlwaysSucceeds) {
  ScenarioParams raw;
  raw.highway_length_m = 20000;
  raw.vehicle_count = 40;
  raw.target_fraction_q = 0.0;
  raw.message_radius_m = 5000;
  const auto p = validate_params(raw);
  for (std::uint64_t t = 0; t < 50; ++t) EXPECT_TRUE(event_R(5000, p, ConnectionTopology::unconnected(), 1, t));
}

TEST(EventR, FullFractionFailsWithUnreachableWindowVehicle) {
  // Source at 0 and a parked car 1 km away, both within D; nobody can bridge the gap.
  const Network net(static_traffic({0, 1000}), {}, ConnectionTopology::connected(), rule(200, 60));
  const auto rep = simulate(net, 0);
  const auto full = evaluate_event(net, rep, 0, 2000, 1.0);
  EXPECT_EQ(full.window_vehicles, 2u);
  EXPECT_EQ(full.window_delivered, 1u);
  EXPECT_FALSE(full.success);
  EXPECT_TRUE(evaluate_event(net, rep, 0, 2000, 0.5).success);
  // Only the source is inside a 500 m window.
  EXPECT_TRUE(evaluate_event(net, rep, 0, 500, 1.0).success);
}

TEST(EventR, SpacingBelowRangeIsRejected) {
  ScenarioParams raw;
  raw.vehicle_count = 10;
  const auto p = validate_params(raw);
  try {
    event_R(150, p, ConnectionTopology::connected(), 1, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SpacingBelowRange);
  }
}

TEST(TraceCsv, HeaderAndRows) {
  const Network net(static_traffic({0, 150, 1000}), servers_at({100}), ConnectionTopology::connected(), rule(200, 60));
  std::ostringstream out;
  write_trace_csv(out, net, simulate(net, 0));
  EXPECT_EQ(out.str(),
            "node_id,is_es,receive_time_s,parent_id\r\n"
            "0,0,0,\r\n"
            "1,0,0,0\r\n"
            "2,0,,\r\n"
            "3,1,0,0\r\n");
}
