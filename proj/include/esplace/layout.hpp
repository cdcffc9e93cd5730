#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "esplace/error.hpp"

namespace esplace {

// Equally spaced edge servers, sorted by position.
struct ServerLayout {
  std::vector<double> positions_m;
  double spacing_m = 0.0;

  std::size_t count() const noexcept { return positions_m.size(); }
  bool empty() const noexcept { return positions_m.empty(); }
};

namespace detail {

// The run of k servers is centered on the highway: margins at both ends are equal.
inline ServerLayout centered_run(double length, std::size_t k, double spacing) {
  ServerLayout out;
  out.spacing_m = spacing;
  out.positions_m.reserve(k);
  const double offset = 0.5 * (length - static_cast<double>(k - 1) * spacing);
  for (std::size_t i = 0; i < k; ++i) out.positions_m.push_back(offset + static_cast<double>(i) * spacing);
  return out;
}

}  // namespace detail

// floor(L / d) servers with gap d.
inline ServerLayout place_servers_by_spacing(double length, double spacing) {
  if (!(spacing > 0.0) || !std::isfinite(spacing))
    throw Error(ErrorCode::NonPositiveSpacing, "spacing must be > 0, got " + std::to_string(spacing));
  const auto k = static_cast<std::size_t>(std::floor(length / spacing));
  if (k == 0) {
    ServerLayout out;
    out.spacing_m = spacing;
    return out;
  }
  return detail::centered_run(length, k, spacing);
}

// k servers at (i + 1/2) * L / k.
inline ServerLayout place_servers_by_count(double length, std::int64_t count) {
  if (count < 0) throw Error(ErrorCode::InvalidParameter, "es_count must be >= 0");
  if (count == 0) return {};
  const auto k = static_cast<std::size_t>(count);
  const double spacing = length / static_cast<double>(k);
  ServerLayout out;
  out.spacing_m = spacing;
  out.positions_m.reserve(k);
  for (std::size_t i = 0; i < k; ++i)
    out.positions_m.push_back((static_cast<double>(i) + 0.5) * spacing);
  return out;
}

// Doubles the server count by adding one server half a gap after each existing one.
// The result is a superset of the input, so layouts along a refinement chain nest.
inline ServerLayout refine_layout(const ServerLayout& layout) {
  ServerLayout out;
  out.spacing_m = layout.spacing_m / 2.0;
  out.positions_m.reserve(2 * layout.count());
  for (double x : layout.positions_m) {
    out.positions_m.push_back(x);
    out.positions_m.push_back(x + out.spacing_m);
  }
  return out;
}

enum class TopologyKind { connected, unconnected, custom };

// Group labelling g(x) of the servers; equal labels mean a wired link.
class ConnectionTopology {
 public:
  static ConnectionTopology connected() { return ConnectionTopology(TopologyKind::connected, {}); }
  static ConnectionTopology unconnected() { return ConnectionTopology(TopologyKind::unconnected, {}); }
  static ConnectionTopology custom(std::vector<std::int64_t> labels) {
    return ConnectionTopology(TopologyKind::custom, std::move(labels));
  }

  TopologyKind kind() const noexcept { return kind_; }

  std::int64_t label(std::size_t x) const {
    switch (kind_) {
      case TopologyKind::connected: return 1;
      case TopologyKind::unconnected: return static_cast<std::int64_t>(x);
      case TopologyKind::custom:
        if (x >= labels_.size()) throw Error(ErrorCode::UnknownServer, "no label for ES " + std::to_string(x));
        return labels_[x];
    }
    return 0;
  }

  bool wired(std::size_t x, std::size_t y) const { return label(x) == label(y); }

  const std::vector<std::int64_t>& labels() const noexcept { return labels_; }

 private:
  ConnectionTopology(TopologyKind kind, std::vector<std::int64_t> labels)
      : kind_(kind), labels_(std::move(labels)) {}

  TopologyKind kind_;
  std::vector<std::int64_t> labels_;
};

inline std::string to_string(TopologyKind kind) {
  switch (kind) {
    case TopologyKind::connected: return "connected";
    case TopologyKind::unconnected: return "unconnected";
    case TopologyKind::custom: return "custom";
  }
  return "custom";
}

// Nearest same-label server on each side with no same-label server in between.
// Servers are indexed by position order, so "between" is an index range.
inline std::vector<std::size_t> direct_neighbors(const ServerLayout& layout,
                                                 const ConnectionTopology& topology, std::size_t x) {
  const std::size_t k = layout.count();
  if (x >= k) throw Error(ErrorCode::UnknownServer, "ES " + std::to_string(x) + " not in layout");
  std::vector<std::size_t> out;
  switch (topology.kind()) {
    case TopologyKind::unconnected:
      return out;
    case TopologyKind::connected:
      if (x > 0) out.push_back(x - 1);
      if (x + 1 < k) out.push_back(x + 1);
      return out;
    case TopologyKind::custom: {
      if (topology.labels().size() != k)
        throw Error(ErrorCode::InvalidParameter, "custom topology label count does not match layout");
      const auto own = topology.label(x);
      for (std::size_t y = x; y-- > 0;) {
        if (topology.label(y) == own) {
          out.push_back(y);
          break;
        }
      }
      for (std::size_t y = x + 1; y < k; ++y) {
        if (topology.label(y) == own) {
          out.push_back(y);
          break;
        }
      }
      return out;
    }
  }
  return out;
}

}  // namespace esplace
