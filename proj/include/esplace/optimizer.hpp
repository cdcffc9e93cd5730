#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "esplace/error.hpp"
#include "esplace/layout.hpp"
#include "esplace/parallel.hpp"
#include "esplace/propagation.hpp"
#include "esplace/rng.hpp"
#include "esplace/scenario.hpp"

namespace esplace {

// Least h >= 0 with (1 + epsilon)^h * m0 >= 2D.
inline std::int64_t compute_h(double radius, double m0, double epsilon) {
  if (!(radius > 0.0) || !(m0 > 0.0)) throw Error(ErrorCode::NegativeLength, "radius and m0 must be > 0");
  if (!(epsilon > 0.0)) throw Error(ErrorCode::ZeroEpsilon, "epsilon must be > 0");
  const double target = 2.0 * radius;
  if (m0 >= target) return 0;
  auto h = static_cast<std::int64_t>(std::ceil(std::log(target / m0) / std::log1p(epsilon)));
  // The closed form can land one off when the ratio sits on an exact power.
  while (h > 0 && std::pow(1.0 + epsilon, static_cast<double>(h - 1)) * m0 >= target) --h;
  while (std::pow(1.0 + epsilon, static_cast<double>(h)) * m0 < target) ++h;
  return h;
}

// Least t >= 1 with h * exp(-t * delta^2 / 2) <= lambda0.
inline std::int64_t compute_t(std::int64_t h, double lambda0, double delta) {
  if (!(delta > 0.0)) throw Error(ErrorCode::NonPositiveDelta, "delta must be > 0");
  if (h < 1) throw Error(ErrorCode::InvalidParameter, "h must be >= 1");
  if (!(lambda0 > 0.0)) throw Error(ErrorCode::InvalidParameter, "lambda0 must be > 0");
  const double hd = static_cast<double>(h);
  const double d2 = delta * delta;
  auto t = static_cast<std::int64_t>(std::ceil(2.0 * std::log(hd / lambda0) / d2));
  t = std::max<std::int64_t>(t, 1);
  auto holds = [&](std::int64_t k) { return hd * std::exp(-static_cast<double>(k) * d2 / 2.0) <= lambda0; };
  while (t > 1 && holds(t - 1)) --t;
  while (!holds(t)) ++t;
  return t;
}

enum class Termination { threshold_fail, range_exceeded };

inline std::string to_string(Termination t) {
  return t == Termination::threshold_fail ? "threshold-fail" : "range-exceeded";
}

struct GridPoint {
  double spacing_m;
  std::int64_t successes;
  std::int64_t trials;
};

struct OptimizerResult {
  double spacing_m = 0.0;
  std::vector<GridPoint> grid;
  std::int64_t h = 0;
  std::int64_t t = 0;
  double delta = 0.0;
  Termination terminated_by = Termination::range_exceeded;
  std::size_t max_fanout = 0;

  std::int64_t event_calls() const noexcept {
    std::int64_t n = 0;
    for (const auto& g : grid) n += g.trials;
    return n;
  }
};

struct RunOptions {
  unsigned workers = 1;
  int es_fanout_cap = 2;
};

// Geometric search from m0 upward: sample t events per spacing, stop at the first spacing
// whose success count falls below (p - delta) t or once the spacing passes 2D, and return
// the spacing sampled just before the stop.
inline OptimizerResult optimize_spacing(const ValidatedParams& params, const ConnectionTopology& topology,
                                        std::uint64_t seed, const RunOptions& options = {}) {
  OptimizerResult res;
  const double m0 = params.range();
  const double limit = 2.0 * params.radius();
  res.delta = params.gamma() / 3.0;
  res.h = compute_h(params.radius(), m0, params.epsilon());
  // With h = 0 the first grid point already exceeds 2D after one round; t is still needed.
  res.t = compute_t(std::max<std::int64_t>(res.h, 1), params.lambda0(), res.delta);
  const double pass_level = (params.p() - res.delta) * static_cast<double>(res.t);

  for (std::int64_t i = 1;; ++i) {
    const double d_i = m0 * std::pow(1.0 + params.epsilon(), static_cast<double>(i - 1));
    const auto base = static_cast<std::uint64_t>(i - 1) * static_cast<std::uint64_t>(res.t);
    auto outcomes = parallel_map(static_cast<std::size_t>(res.t), options.workers, [&](std::size_t j) {
      return event_outcome(d_i, params, topology, seed, base + j, options.es_fanout_cap);
    });
    std::int64_t s = 0;
    for (const auto& o : outcomes) {
      s += o.success ? 1 : 0;
      res.max_fanout = std::max(res.max_fanout, o.max_fanout);
    }
    res.grid.push_back({d_i, s, res.t});

    const double d_next = m0 * std::pow(1.0 + params.epsilon(), static_cast<double>(i));
    if (static_cast<double>(s) < pass_level) {
      res.terminated_by = Termination::threshold_fail;
      break;
    }
    if (d_next > limit) {
      res.terminated_by = Termination::range_exceeded;
      break;
    }
  }
  res.spacing_m = res.grid.back().spacing_m;
  return res;
}

struct CurvePoint {
  double spacing_m;
  double frequency;
  std::int64_t trials;
};

struct ThresholdEstimate {
  double spacing_m = 0.0;
  bool feasible = false;  // false: no grid point reached p_level, spacing_m = m0
  std::vector<CurvePoint> curve;
  std::size_t monotonicity_violations = 0;  // rises beyond 2 sigma between neighbours
};

inline constexpr std::uint64_t oracle_stream = 0x6f7261636c652121ULL;

// Empirical success frequency of the event on the dense grid m0 (1 + grid_factor)^k <= 2D.
inline std::vector<CurvePoint> success_curve(const ValidatedParams& params, const ConnectionTopology& topology,
                                             double grid_factor, std::int64_t trials_per_point, std::uint64_t seed,
                                             const RunOptions& options = {}) {
  if (!(grid_factor > 0.0)) throw Error(ErrorCode::InvalidParameter, "grid_factor must be > 0");
  if (trials_per_point < 1) throw Error(ErrorCode::InvalidParameter, "trials_per_point must be >= 1");
  const double m0 = params.range();
  const double limit = 2.0 * params.radius();
  const std::uint64_t oracle_seed = splitmix64(seed ^ oracle_stream);

  std::vector<double> grid;
  for (std::int64_t k = 0;; ++k) {
    const double d = m0 * std::pow(1.0 + grid_factor, static_cast<double>(k));
    if (d > limit && k > 0) break;
    grid.push_back(d);
    if (d > limit) break;
  }

  const auto per = static_cast<std::size_t>(trials_per_point);
  auto hits = parallel_map(grid.size() * per, options.workers, [&](std::size_t idx) -> char {
    const std::size_t k = idx / per;
    return event_outcome(grid[k], params, topology, oracle_seed, idx, options.es_fanout_cap).success ? 1 : 0;
  });

  std::vector<CurvePoint> curve;
  curve.reserve(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    std::int64_t s = 0;
    for (std::size_t j = 0; j < per; ++j) s += hits[k * per + j];
    curve.push_back({grid[k], static_cast<double>(s) / static_cast<double>(trials_per_point), trials_per_point});
  }
  return curve;
}

// Largest grid spacing whose frequency reaches p_level.
inline ThresholdEstimate threshold_from_curve(std::vector<CurvePoint> curve, double p_level, double m0) {
  ThresholdEstimate est;
  est.spacing_m = m0;
  for (const auto& pt : curve) {
    if (pt.frequency >= p_level) {
      est.spacing_m = pt.spacing_m;
      est.feasible = true;
    }
  }
  for (std::size_t k = 1; k < curve.size(); ++k) {
    const auto& a = curve[k - 1];
    const auto& b = curve[k];
    const double var = a.frequency * (1 - a.frequency) / static_cast<double>(a.trials) +
                       b.frequency * (1 - b.frequency) / static_cast<double>(b.trials);
    if (b.frequency - a.frequency > 2.0 * std::sqrt(var) && b.frequency > a.frequency) ++est.monotonicity_violations;
  }
  est.curve = std::move(curve);
  return est;
}

inline ThresholdEstimate brute_force_fg(double p_level, const ValidatedParams& params,
                                        const ConnectionTopology& topology, double grid_factor,
                                        std::int64_t trials_per_point, std::uint64_t seed,
                                        const RunOptions& options = {}) {
  return threshold_from_curve(success_curve(params, topology, grid_factor, trials_per_point, seed, options), p_level,
                              params.range());
}

}  // namespace esplace
