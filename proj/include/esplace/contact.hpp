#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "esplace/error.hpp"

namespace esplace {

// A vehicle or an edge server. Servers are vehicles of speed zero.
struct Node {
  int id = 0;
  double position_m = 0.0;  // at time 0
  double speed_mps = 0.0;
  bool is_es = false;

  double position_at(double t) const noexcept { return position_m + speed_mps * t; }
};

struct ContactRule {
  double range_m0 = 200.0;
  double delay_budget_s = 0.5;
  bool directional_forwarding = false;
  // Most servers a single sender may reach wirelessly; 0 disables the cap.
  int es_fanout_cap = 2;

  static constexpr double wired_delay_s = 0.0;
};

struct TimeWindow {
  double lo;
  double hi;
};

// Times in [0, t0] at which `from` can hand a message to `to`. Positions follow
// unbounded straight lines, so the in-range set is a single interval; the directional
// rule (vehicle must be heading toward the receiving server) only shortens its end.
inline std::optional<TimeWindow> contact_window(const Node& from, const Node& to, const ContactRule& rule) {
  const double t0 = rule.delay_budget_s;
  const double m0 = rule.range_m0;
  const double gap = to.position_m - from.position_m;
  const double closing = to.speed_mps - from.speed_mps;

  double lo = 0.0;
  double hi = t0;
  if (closing == 0.0) {
    if (std::abs(gap) > m0) return std::nullopt;
  } else {
    const double a = (-m0 - gap) / closing;
    const double b = (m0 - gap) / closing;
    lo = std::max(lo, std::min(a, b));
    hi = std::min(hi, std::max(a, b));
  }

  if (rule.directional_forwarding && to.is_es && !from.is_es) {
    if (from.speed_mps == 0.0) return std::nullopt;
    hi = std::min(hi, gap / from.speed_mps);
  }

  if (lo > hi) return std::nullopt;
  return TimeWindow{lo, hi};
}

// Least t in [t_start, t0] at which the pair is in contact.
inline std::optional<double> earliest_contact(const Node& from, const Node& to, double t_start,
                                              const ContactRule& rule) {
  if (t_start > rule.delay_budget_s || t_start < 0.0 || std::isnan(t_start))
    throw Error(ErrorCode::InvalidWindow,
                "t_start " + std::to_string(t_start) + " outside [0, " + std::to_string(rule.delay_budget_s) + "]");
  auto w = contact_window(from, to, rule);
  if (!w || w->hi < t_start) return std::nullopt;
  return std::max(t_start, w->lo);
}

}  // namespace esplace
