#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace colltrain {

using SensorId = std::uint32_t;

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Undirected, edge-ordered pair with first < second.
struct Edge {
  SensorId a = 0;
  SensorId b = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Sensor communication graph. Also the structure of the undirected
/// graphical model: one variable per sensor, one pairwise factor per edge.
///
/// Immutable once built. Edges are stored once, canonically ordered and
/// sorted ascending; neighbor lists are sorted and symmetric.
class Topology {
 public:
  Topology() = default;

  /// Builds from an explicit edge list. Orientation and duplicates are
  /// normalized away; self-loops and out-of-range endpoints throw.
  Topology(std::size_t num_sensors, std::span<const std::pair<SensorId, SensorId>> edges,
           std::optional<std::vector<Point>> positions = std::nullopt);

  /// Closed-ball geometric graph over given positions: edge iff distance <= radius.
  static Topology from_positions(std::vector<Point> positions, double radius);

  /// m sensors uniform i.i.d. in the unit square, linked within `radius`.
  static Topology random_geometric(std::size_t m, double radius, std::uint64_t seed);

  /// Each unordered pair linked independently with p = expected_degree / (m - 1).
  static Topology random_expected_degree(std::size_t m, double expected_degree,
                                         std::uint64_t seed);

  std::size_t num_sensors() const noexcept { return adjacency_.size(); }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  std::span<const Edge> edges() const noexcept { return edges_; }
  const std::optional<std::vector<Point>>& positions() const noexcept { return positions_; }

  /// Sorted, duplicate-free, never contains s. Throws OutOfRange.
  std::span<const SensorId> neighbors(SensorId s) const;
  std::size_t degree(SensorId s) const { return neighbors(s).size(); }

  /// Index into edges() of {s, t}, if present.
  std::optional<std::size_t> edge_index(SensorId s, SensorId t) const;

  /// True iff the graph has no cycle (a forest; disconnected graphs allowed).
  bool is_tree() const;

  bool is_connected() const;

  /// Component label per sensor, labels dense from 0 in order of lowest member.
  std::vector<std::size_t> component_labels() const;

  /// Longest shortest path (in hops) over all components.
  std::size_t diameter() const;

  /// "m <count>" then one "s t" line per edge, ascending.
  std::string to_edge_list() const;
  static Topology from_edge_list(std::istream& in);

 private:
  std::vector<Edge> edges_;
  std::vector<std::vector<SensorId>> adjacency_;
  std::optional<std::vector<Point>> positions_;
};

}  // namespace colltrain
