#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "esplace/layout.hpp"
#include "esplace/metrics.hpp"
#include "esplace/optimizer.hpp"
#include "esplace/oracle.hpp"
#include "esplace/propagation.hpp"
#include "esplace/rng.hpp"

namespace esplace {

struct PropertyCount {
  std::string name;
  std::int64_t checked = 0;
  std::int64_t failures = 0;
};

struct VerifyReport {
  std::vector<PropertyCount> properties;
  std::size_t max_fanout = 0;

  bool ok() const noexcept {
    for (const auto& p : properties)
      if (p.failures != 0) return false;
    return true;
  }
};

// Closed forms for the grid size and per-point trial count over random draws.
inline PropertyCount check_formulas(std::uint64_t seed, std::int64_t draws) {
  PropertyCount pc{"formula_h_t_closed_form"};
  Rng rng(substream_seed(seed, 0x666f726d, 0));
  for (std::int64_t k = 0; k < draws; ++k) {
    const double m0 = rng.uniform(50.0, 1000.0);
    const double radius = rng.uniform(0.6 * m0, 200.0 * m0);
    const double eps = rng.uniform(0.01, 0.99);
    const double lambda0 = rng.uniform(0.01, 1.0);
    const double delta = rng.uniform(0.01, 0.33);
    const double ratio = std::log(2.0 * radius / m0) / std::log(1.0 + eps);
    const auto h_ref = static_cast<std::int64_t>(std::max(0.0, std::ceil(ratio)));
    const auto h = compute_h(radius, m0, eps);
    const auto hh = std::max<std::int64_t>(h, 1);
    const auto t_ref = std::max<std::int64_t>(
        1, static_cast<std::int64_t>(std::ceil(2.0 * std::log(static_cast<double>(hh) / lambda0) / (delta * delta))));
    const auto t = compute_t(hh, lambda0, delta);
    ++pc.checked;
    if (h != h_ref || t != t_ref) ++pc.failures;
  }
  return pc;
}

// Fast simulator against both brute-force labelings on random small instances.
inline PropertyCount check_oracle_equivalence(std::uint64_t seed, std::int64_t instances, std::size_t* max_fanout) {
  PropertyCount pc{"simulate_matches_oracle"};
  for (std::int64_t s = 0; s < instances; ++s) {
    auto inst = oracle::random_instance(substream_seed(seed, 0x6f7261, static_cast<std::uint64_t>(s)));
    const Network net(inst.traffic, inst.layout, inst.topology, inst.rule);
    const auto rep = simulate(net, inst.traffic.source_id);
    if (max_fanout) *max_fanout = std::max(*max_fanout, rep.max_fanout);
    bool ok = oracle::compare(rep, oracle::scan_labels(net, *inst.traffic.source_id)).matches(1e-9);

    auto uncapped = inst.rule;
    uncapped.es_fanout_cap = 0;
    const Network open(inst.traffic, inst.layout, inst.topology, uncapped);
    ok = ok && oracle::compare(simulate(open, inst.traffic.source_id),
                               oracle::relaxation_labels(open, *inst.traffic.source_id))
                   .matches(1e-9);
    ++pc.checked;
    if (!ok) ++pc.failures;
  }
  return pc;
}

// Delivered-set inclusion for nested layouts and growing range, plus the
// direct + indirect = total identity, on random snapshots.
inline std::vector<PropertyCount> check_monotonicity(std::uint64_t seed, std::int64_t snapshots) {
  PropertyCount nested{"nested_layout_inclusion"}, range{"range_inclusion"}, identity{"direct_plus_indirect"};
  for (std::int64_t s = 0; s < snapshots; ++s) {
    Rng rng(substream_seed(seed, 0x6d6f6e, static_cast<std::uint64_t>(s)));
    ScenarioParams raw;
    raw.highway_length_m = rng.uniform(5000.0, 20000.0);
    raw.vehicle_count = static_cast<std::int64_t>(rng.uniform(10.0, 120.0));
    raw.delay_budget_s = rng.uniform(0.5, 30.0);
    raw.directional_forwarding = rng.uniform01() < 0.3;
    const auto params = validate_params(raw);
    const auto traffic = generate_traffic(params, seed, static_cast<std::uint64_t>(s));
    const auto rule = contact_rule_for(params);
    auto uncapped = rule;
    uncapped.es_fanout_cap = 0;

    auto subset = [](const DeliveryReport& a, const DeliveryReport& b) {
      for (std::size_t v = 0; v < a.receive_time.size(); ++v)
        if (a.receive_time[v] && !b.receive_time[v]) return false;
      return true;
    };
    // Vehicles keep their ids across layouts; only compare vehicle entries.
    auto vehicle_subset = [&](const DeliveryReport& a, const DeliveryReport& b) {
      for (std::size_t v = 0; v < traffic.size(); ++v)
        if (a.receive_time[v] && !b.receive_time[v]) return false;
      return true;
    };
    auto uplink_subset = [&](const UplinkClassification& a, const UplinkClassification& b) {
      for (std::size_t v = 0; v < a.connected.size(); ++v)
        if (a.connected[v] && !b.connected[v]) return false;
      return true;
    };

    const auto coarse = place_servers_by_count(params.length(), static_cast<std::int64_t>(rng.uniform(1.0, 12.0)));
    const auto fine = refine_layout(coarse);
    bool ok = true;
    for (const auto& [topology, r] : {std::pair{ConnectionTopology::connected(), rule},
                                      std::pair{ConnectionTopology::unconnected(), uncapped}}) {
      const Network a(traffic, coarse, topology, r), b(traffic, fine, topology, r);
      ok = ok && vehicle_subset(simulate(a, traffic.source_id), simulate(b, traffic.source_id));
    }
    ok = ok && uplink_subset(classify_uplink(Network(traffic, coarse, ConnectionTopology::unconnected(), rule)),
                             classify_uplink(Network(traffic, fine, ConnectionTopology::unconnected(), rule)));
    ++nested.checked;
    if (!ok) ++nested.failures;

    auto wider = rule;
    wider.range_m0 = rule.range_m0 * rng.uniform(1.0, 3.0);
    auto wider_uncapped = wider;
    wider_uncapped.es_fanout_cap = 0;
    ok = true;
    for (const auto& [topology, r1, r2] :
         {std::tuple{ConnectionTopology::connected(), rule, wider},
          std::tuple{ConnectionTopology::unconnected(), uncapped, wider_uncapped}}) {
      const Network a(traffic, coarse, topology, r1), b(traffic, coarse, topology, r2);
      ok = ok && subset(simulate(a, traffic.source_id), simulate(b, traffic.source_id));
    }
    ok = ok && uplink_subset(classify_uplink(Network(traffic, coarse, ConnectionTopology::unconnected(), rule)),
                             classify_uplink(Network(traffic, coarse, ConnectionTopology::unconnected(), wider)));
    ++range.checked;
    if (!ok) ++range.failures;

    for (const auto* layout : {&coarse, &fine}) {
      const auto counts = connectivity_trial(traffic, *layout, rule);
      const auto b = aggregate({counts});
      ++identity.checked;
      if (b.total != b.direct + b.indirect || counts.n_direct + counts.n_indirect > counts.n_vehicles ||
          b.total < 0.0 || b.total > 1.0)
        ++identity.failures;
    }
  }
  return {nested, range, identity};
}

inline VerifyReport run_verification(std::uint64_t seed, std::int64_t formula_draws = 1000,
                                     std::int64_t oracle_instances = 200, std::int64_t snapshots = 100) {
  VerifyReport rep;
  rep.properties.push_back(check_formulas(seed, formula_draws));
  rep.properties.push_back(check_oracle_equivalence(seed, oracle_instances, &rep.max_fanout));
  for (auto& pc : check_monotonicity(seed, snapshots)) rep.properties.push_back(std::move(pc));
  return rep;
}

}  // namespace esplace
