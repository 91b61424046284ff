#include "core/graph.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <queue>
#include <sstream>

#include "core/errors.hpp"
#include "core/random.hpp"

namespace colltrain {

Topology::Topology(std::size_t num_sensors,
                   std::span<const std::pair<SensorId, SensorId>> edges,
                   std::optional<std::vector<Point>> positions)
    : adjacency_(num_sensors), positions_(std::move(positions)) {
  if (positions_ && positions_->size() != num_sensors) {
    throw InvalidArgument("topology: position count does not match sensor count");
  }
  edges_.reserve(edges.size());
  for (auto [s, t] : edges) {
    if (s >= num_sensors || t >= num_sensors) {
      throw OutOfRange("topology: edge endpoint " + std::to_string(std::max(s, t)) +
                       " out of range for " + std::to_string(num_sensors) + " sensors");
    }
    if (s == t) {
      throw InvalidArgument("topology: self-loop at sensor " + std::to_string(s));
    }
    edges_.push_back(Edge{std::min(s, t), std::max(s, t)});
  }
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
  for (const Edge& e : edges_) {
    adjacency_[e.a].push_back(e.b);
    adjacency_[e.b].push_back(e.a);
  }
  for (auto& nbrs : adjacency_) std::sort(nbrs.begin(), nbrs.end());
}

Topology Topology::from_positions(std::vector<Point> positions, double radius) {
  if (!(radius >= 0.0)) throw InvalidArgument("topology: radius must be >= 0");
  std::vector<std::pair<SensorId, SensorId>> edges;
  const double r2 = radius * radius;
  for (std::size_t s = 0; s < positions.size(); ++s) {
    for (std::size_t t = s + 1; t < positions.size(); ++t) {
      const double dx = positions[s].x - positions[t].x;
      const double dy = positions[s].y - positions[t].y;
      if (dx * dx + dy * dy <= r2) {
        edges.emplace_back(static_cast<SensorId>(s), static_cast<SensorId>(t));
      }
    }
  }
  const std::size_t m = positions.size();
  return Topology(m, edges, std::move(positions));
}

Topology Topology::random_geometric(std::size_t m, double radius, std::uint64_t seed) {
  if (m < 1) throw InvalidArgument("topology: need at least one sensor");
  if (!(radius >= 0.0)) throw InvalidArgument("topology: radius must be >= 0");
  Rng rng(seed);
  std::vector<Point> pos(m);
  for (auto& p : pos) {
    p.x = uniform01(rng);
    p.y = uniform01(rng);
  }
  return from_positions(std::move(pos), radius);
}

Topology Topology::random_expected_degree(std::size_t m, double expected_degree,
                                          std::uint64_t seed) {
  if (m < 1) throw InvalidArgument("topology: need at least one sensor");
  if (!(expected_degree >= 0.0)) {
    throw InvalidArgument("topology: expected degree must be >= 0");
  }
  if (expected_degree > static_cast<double>(m - 1)) {
    throw InvalidArgument("topology: expected degree " + std::to_string(expected_degree) +
                          " exceeds m - 1 = " + std::to_string(m - 1));
  }
  std::vector<std::pair<SensorId, SensorId>> edges;
  if (m > 1) {
    const double p = expected_degree / static_cast<double>(m - 1);
    Rng rng(seed);
    for (std::size_t s = 0; s < m; ++s) {
      for (std::size_t t = s + 1; t < m; ++t) {
        // One draw per pair regardless of p keeps the stream aligned.
        if (uniform01(rng) < p) {
          edges.emplace_back(static_cast<SensorId>(s), static_cast<SensorId>(t));
        }
      }
    }
  }
  return Topology(m, edges);
}

std::span<const SensorId> Topology::neighbors(SensorId s) const {
  if (s >= adjacency_.size()) {
    throw OutOfRange("topology: sensor " + std::to_string(s) + " out of range");
  }
  return adjacency_[s];
}

std::optional<std::size_t> Topology::edge_index(SensorId s, SensorId t) const {
  const Edge key{std::min(s, t), std::max(s, t)};
  auto it = std::lower_bound(edges_.begin(), edges_.end(), key);
  if (it == edges_.end() || *it != key) return std::nullopt;
  return static_cast<std::size_t>(it - edges_.begin());
}

std::vector<std::size_t> Topology::component_labels() const {
  constexpr auto kUnset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> label(num_sensors(), kUnset);
  std::size_t next = 0;
  std::vector<SensorId> stack;
  for (SensorId root = 0; root < num_sensors(); ++root) {
    if (label[root] != kUnset) continue;
    label[root] = next;
    stack.push_back(root);
    while (!stack.empty()) {
      SensorId u = stack.back();
      stack.pop_back();
      for (SensorId v : adjacency_[u]) {
        if (label[v] == kUnset) {
          label[v] = next;
          stack.push_back(v);
        }
      }
    }
    ++next;
  }
  return label;
}

bool Topology::is_tree() const {
  // A forest has exactly (nodes - components) edges.
  const auto labels = component_labels();
  const std::size_t components =
      labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  return num_edges() + components == num_sensors();
}

bool Topology::is_connected() const {
  const auto labels = component_labels();
  return std::all_of(labels.begin(), labels.end(), [](std::size_t l) { return l == 0; });
}

std::size_t Topology::diameter() const {
  std::size_t best = 0;
  constexpr auto kUnset = static_cast<std::size_t>(-1);
  std::vector<std::size_t> dist(num_sensors());
  for (SensorId src = 0; src < num_sensors(); ++src) {
    std::fill(dist.begin(), dist.end(), kUnset);
    std::queue<SensorId> q;
    dist[src] = 0;
    q.push(src);
    while (!q.empty()) {
      SensorId u = q.front();
      q.pop();
      best = std::max(best, dist[u]);
      for (SensorId v : adjacency_[u]) {
        if (dist[v] == kUnset) {
          dist[v] = dist[u] + 1;
          q.push(v);
        }
      }
    }
  }
  return best;
}

std::string Topology::to_edge_list() const {
  std::ostringstream out;
  out << "m " << num_sensors() << '\n';
  for (const Edge& e : edges_) out << e.a << ' ' << e.b << '\n';
  return out.str();
}

Topology Topology::from_edge_list(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::optional<std::size_t> m;
  std::vector<std::pair<SensorId, SensorId>> edges;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    if (!m) {
      std::string tag;
      std::size_t count = 0;
      if (!(fields >> tag >> count) || tag != "m") {
        throw DataError("edge list line " + std::to_string(line_no) +
                        ": expected header \"m <count>\"");
      }
      m = count;
      continue;
    }
    std::uint64_t s = 0, t = 0;
    if (!(fields >> s >> t)) {
      throw DataError("edge list line " + std::to_string(line_no) + ": expected \"s t\"");
    }
    if (s >= *m || t >= *m) {
      throw DataError("edge list line " + std::to_string(line_no) + ": endpoint out of range");
    }
    edges.emplace_back(static_cast<SensorId>(s), static_cast<SensorId>(t));
  }
  if (!m) throw DataError("edge list: missing header");
  return Topology(*m, edges);
}

}  // namespace colltrain
