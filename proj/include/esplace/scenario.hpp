#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "esplace/error.hpp"
#include "esplace/rng.hpp"

namespace esplace {

enum class DirectionMode { one_way, two_way };
enum class PositionLaw { uniform, poisson };

// Highway traffic parameter set. Lengths in meters, times in seconds, speeds in m/s.
struct ScenarioParams {
  double highway_length_m = 100000.0;
  double range_m0 = 200.0;
  double speed_min_mps = 20.0;
  double speed_max_mps = 30.0;
  // Exactly one of these two may be set; neither set means the default count below.
  std::optional<std::int64_t> vehicle_count;
  std::optional<double> density_per_km;
  double delay_budget_s = 0.5;
  double message_radius_m = 20000.0;
  double target_fraction_q = 0.7;
  double target_prob_p = 0.9;
  double gamma = 0.3;
  double epsilon = 0.1;
  double lambda0 = 0.1;
  DirectionMode direction_mode = DirectionMode::two_way;
  bool directional_forwarding = false;
  PositionLaw position_law = PositionLaw::uniform;

  static constexpr std::int64_t default_vehicle_count = 1060;
};

// Params that passed validate_params. Only constructible through it.
class ValidatedParams {
 public:
  const ScenarioParams& raw() const noexcept { return raw_; }
  double length() const noexcept { return raw_.highway_length_m; }
  double range() const noexcept { return raw_.range_m0; }
  double speed_min() const noexcept { return raw_.speed_min_mps; }
  double speed_max() const noexcept { return raw_.speed_max_mps; }
  // Midpoint of the speed interval; informational only.
  double nominal_speed() const noexcept { return 0.5 * (raw_.speed_min_mps + raw_.speed_max_mps); }
  std::int64_t vehicle_count() const noexcept { return vehicle_count_; }
  double delay_budget() const noexcept { return raw_.delay_budget_s; }
  double radius() const noexcept { return raw_.message_radius_m; }
  double q() const noexcept { return raw_.target_fraction_q; }
  double p() const noexcept { return raw_.target_prob_p; }
  double gamma() const noexcept { return raw_.gamma; }
  double epsilon() const noexcept { return raw_.epsilon; }
  double lambda0() const noexcept { return raw_.lambda0; }
  double delta() const noexcept { return raw_.gamma / 3.0; }
  bool two_way() const noexcept { return raw_.direction_mode == DirectionMode::two_way; }
  bool directional_forwarding() const noexcept { return raw_.directional_forwarding; }
  PositionLaw position_law() const noexcept { return raw_.position_law; }

 private:
  friend ValidatedParams validate_params(const ScenarioParams&);
  ValidatedParams(ScenarioParams raw, std::int64_t n) : raw_(std::move(raw)), vehicle_count_(n) {}

  ScenarioParams raw_;
  std::int64_t vehicle_count_;
};

inline ValidatedParams validate_params(const ScenarioParams& raw) {
  std::vector<Violation> bad;
  auto positive = [&](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
      bad.push_back({ErrorCode::NegativeLength, std::string(name) + " must be > 0"});
  };
  auto unit = [&](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0))
      bad.push_back({ErrorCode::InvalidParameter, std::string(name) + " must lie in [0, 1]"});
  };

  positive(raw.highway_length_m, "highway_length_m");
  positive(raw.range_m0, "range_m0");
  positive(raw.delay_budget_s, "delay_budget_s");
  positive(raw.message_radius_m, "message_radius_m");

  if (!(raw.speed_min_mps >= 0.0))
    bad.push_back({ErrorCode::InvalidParameter, "speed_min_mps must be >= 0"});
  if (!(raw.speed_min_mps <= raw.speed_max_mps))
    bad.push_back({ErrorCode::EmptySpeedRange, "speed_min_mps > speed_max_mps"});

  unit(raw.target_fraction_q, "target_fraction_q");
  unit(raw.target_prob_p, "target_prob_p");

  // p - gamma/3 is the acceptance level of the optimizer's stopping test.
  if (!(raw.target_prob_p - raw.gamma / 3.0 > 1e-12))
    bad.push_back({ErrorCode::DegenerateProbability, "target_prob_p - gamma/3 must be > 0"});
  if (!(raw.gamma > 0.0 && raw.gamma < raw.target_prob_p))
    bad.push_back({ErrorCode::InvalidParameter, "gamma must lie in (0, target_prob_p)"});

  if (!(raw.epsilon > 0.0))
    bad.push_back({ErrorCode::ZeroEpsilon, "epsilon must be > 0"});
  else if (!(raw.epsilon < 1.0))
    bad.push_back({ErrorCode::InvalidParameter, "epsilon must be < 1"});
  if (!(raw.lambda0 > 0.0 && raw.lambda0 <= 1.0))
    bad.push_back({ErrorCode::InvalidParameter, "lambda0 must lie in (0, 1]"});

  std::int64_t n = ScenarioParams::default_vehicle_count;
  if (raw.vehicle_count && raw.density_per_km) {
    bad.push_back({ErrorCode::InvalidParameter,
                   "vehicle_count and density_per_km are mutually exclusive"});
  } else if (raw.vehicle_count) {
    if (*raw.vehicle_count < 0)
      bad.push_back({ErrorCode::InvalidParameter, "vehicle_count must be >= 0"});
    n = *raw.vehicle_count;
  } else if (raw.density_per_km) {
    if (!(*raw.density_per_km >= 0.0))
      bad.push_back({ErrorCode::InvalidParameter, "density_per_km must be >= 0"});
    else
      n = static_cast<std::int64_t>(std::llround(*raw.density_per_km * raw.highway_length_m / 1000.0));
  }

  if (!bad.empty()) throw ValidationError(std::move(bad));
  return ValidatedParams(raw, n);
}

struct Vehicle {
  int id;
  double position_m;
  double speed_mps;  // signed; positive moves toward increasing position
};

struct TrafficSnapshot {
  std::vector<Vehicle> vehicles;
  std::optional<int> source_id;
  std::uint64_t seed = 0;
  std::uint64_t trial_index = 0;

  std::size_t size() const noexcept { return vehicles.size(); }
};

inline constexpr std::uint64_t traffic_stream = 0x7472616666696321ULL;

// Vehicle closest to the highway midpoint; lowest id on ties.
inline std::optional<int> midpoint_source(const std::vector<Vehicle>& vehicles, double length) {
  std::optional<int> best;
  double best_gap = 0.0;
  for (const auto& v : vehicles) {
    double gap = std::abs(v.position_m - 0.5 * length);
    if (!best || gap < best_gap) {
      best = v.id;
      best_gap = gap;
    }
  }
  return best;
}

// Pure function of (params, seed, trial_index).
inline TrafficSnapshot generate_traffic(const ValidatedParams& params, std::uint64_t seed,
                                        std::uint64_t trial_index) {
  Rng rng(substream_seed(seed, traffic_stream, trial_index));
  TrafficSnapshot snap;
  snap.seed = seed;
  snap.trial_index = trial_index;

  const double length = params.length();
  auto draw_speed = [&] {
    double magnitude = rng.uniform(params.speed_min(), params.speed_max());
    if (params.two_way() && rng.coin()) return -magnitude;
    return magnitude;
  };

  if (params.position_law() == PositionLaw::uniform) {
    const auto n = params.vehicle_count();
    snap.vehicles.reserve(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
      double x = rng.uniform(0.0, length);
      double v = draw_speed();
      snap.vehicles.push_back({static_cast<int>(i), x, v});
    }
  } else if (params.vehicle_count() > 0) {
    // Homogeneous Poisson process with the configured mean count.
    const double rate = static_cast<double>(params.vehicle_count()) / length;
    double x = rng.exponential(rate);
    while (x <= length) {
      double v = draw_speed();
      snap.vehicles.push_back({static_cast<int>(snap.vehicles.size()), x, v});
      x += rng.exponential(rate);
    }
  }

  snap.source_id = midpoint_source(snap.vehicles, length);
  return snap;
}

}  // namespace esplace
