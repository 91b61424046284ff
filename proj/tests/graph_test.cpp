#include <cmath>
#include <numeric>
#include <sstream>

#include "doctest.h"

#include "core/errors.hpp"
#include "core/graph.hpp"
#include "core/oracle.hpp"
#include "core/random.hpp"

using namespace colltrain;

namespace {

using Pairs = std::vector<std::pair<SensorId, SensorId>>;

bool adjacency_symmetric(const Topology& t) {
  for (SensorId s = 0; s < t.num_sensors(); ++s) {
    for (SensorId u : t.neighbors(s)) {
      const auto back = t.neighbors(u);
      if (std::find(back.begin(), back.end(), s) == back.end()) return false;
      if (u == s) return false;
    }
  }
  return true;
}

// Cycle detection by union-find, independent of Topology::is_tree.
bool acyclic_by_union_find(const Topology& t) {
  std::vector<std::size_t> parent(t.num_sensors());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const Edge& e : t.edges()) {
    const auto a = find(e.a), b = find(e.b);
    if (a == b) return false;
    parent[a] = b;
  }
  return true;
}

}  // namespace

TEST_CASE("random_geometric small cases") {
  CHECK(Topology::random_geometric(1, 0.2, 3).num_edges() == 0);
  CHECK(Topology::random_geometric(30, 0.0, 3).num_edges() == 0);
  const auto forced = Topology::from_positions({{0.0, 0.0}, {0.0, 0.1}}, 0.2);
  CHECK(forced.num_edges() == 1);
  CHECK(Topology::from_positions({{0.0, 0.0}, {0.0, 0.3}}, 0.2).num_edges() == 0);
}

TEST_CASE("random_geometric matches a pairwise distance scan") {
  for (std::uint64_t seed : {7ULL, 8ULL, 9ULL}) {
    const auto t = Topology::random_geometric(50, 0.2, seed);
    const auto& pos = *t.positions();
    std::size_t count = 0;
    for (std::size_t i = 0; i < pos.size(); ++i) {
      for (std::size_t j = i + 1; j < pos.size(); ++j) {
        const double d = std::hypot(pos[i].x - pos[j].x, pos[i].y - pos[j].y);
        if (d <= 0.2) {
          ++count;
          CHECK(t.edge_index(static_cast<SensorId>(i), static_cast<SensorId>(j)).has_value());
        }
      }
    }
    CHECK(t.num_edges() == count);
    CHECK(adjacency_symmetric(t));
  }
}

TEST_CASE("random_geometric depends on the seed only through positions") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto t = Topology::random_geometric(40, 0.25, seed);
    const auto again = Topology::from_positions(*t.positions(), 0.25);
    CHECK(std::equal(t.edges().begin(), t.edges().end(), again.edges().begin(), again.edges().end()));
  }
}

TEST_CASE("random_expected_degree extremes and validation") {
  CHECK(Topology::random_expected_degree(20, 0.0, 1).num_edges() == 0);
  const auto k5 = Topology::random_expected_degree(5, 4.0, 1);
  CHECK(k5.num_edges() == 10);
  CHECK_THROWS_AS(Topology::random_expected_degree(5, 4.5, 1), InvalidArgument);
  CHECK_THROWS_AS(Topology::random_expected_degree(5, -1.0, 1), InvalidArgument);
  CHECK(adjacency_symmetric(Topology::random_expected_degree(30, 5.0, 2)));
}

TEST_CASE("random_expected_degree mean degree over many seeds") {
  const std::size_t trials = 10000;
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t k = 0; k < trials; ++k) {
    const auto t = Topology::random_expected_degree(20, 4.0, derive_seed(99, "deg", k));
    const double mean_degree = 2.0 * static_cast<double>(t.num_edges()) / 20.0;
    sum += mean_degree;
    sum_sq += mean_degree * mean_degree;
  }
  const double mean = sum / trials;
  const double var = (sum_sq - trials * mean * mean) / (trials - 1);
  const double se = std::sqrt(var / trials);
  CHECK(std::abs(mean - 4.0) <= 3.0 * se);
}

TEST_CASE("neighbors") {
  const Topology k3(3, Pairs{{0, 1}, {1, 2}, {2, 0}});
  const auto n0 = k3.neighbors(0);
  CHECK(std::vector<SensorId>(n0.begin(), n0.end()) == std::vector<SensorId>{1, 2});
  const Topology empty(3, Pairs{});
  CHECK(empty.neighbors(0).empty());
  const Topology path(3, Pairs{{1, 0}, {2, 1}});
  const auto n1 = path.neighbors(1);
  CHECK(std::vector<SensorId>(n1.begin(), n1.end()) == std::vector<SensorId>{0, 2});
  CHECK_THROWS_AS(path.neighbors(3), OutOfRange);
}

TEST_CASE("edge list construction normalizes and validates") {
  const Topology t(4, Pairs{{3, 1}, {1, 3}, {0, 2}});
  CHECK(t.num_edges() == 2);
  CHECK(t.edges()[0] == Edge{0, 2});
  CHECK(t.edges()[1] == Edge{1, 3});
  CHECK_THROWS_AS(Topology(3, Pairs{{1, 1}}), InvalidArgument);
  CHECK_THROWS_AS(Topology(3, Pairs{{0, 3}}), OutOfRange);
}

TEST_CASE("is_tree") {
  CHECK(Topology(5, Pairs{{0, 1}, {1, 2}, {2, 3}, {3, 4}}).is_tree());
  CHECK_FALSE(Topology(3, Pairs{{0, 1}, {1, 2}, {0, 2}}).is_tree());
  CHECK(Topology(4, Pairs{{0, 1}}).is_tree());
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto t = Topology::random_geometric(20, 0.25, seed);
    CHECK(t.is_tree() == acyclic_by_union_find(t));
  }
}

TEST_CASE("components and diameter") {
  const Topology t(6, Pairs{{0, 1}, {1, 2}, {4, 5}});
  const auto labels = t.component_labels();
  CHECK(labels == std::vector<std::size_t>{0, 0, 0, 1, 2, 2});
  CHECK_FALSE(t.is_connected());
  CHECK(t.diameter() == 2);
  CHECK(Topology(1, Pairs{}).is_connected());
}

TEST_CASE("edge list text round trip") {
  const auto t = Topology::random_geometric(25, 0.3, 4);
  std::istringstream in(t.to_edge_list());
  const auto back = Topology::from_edge_list(in);
  CHECK(back.num_sensors() == t.num_sensors());
  CHECK(std::equal(t.edges().begin(), t.edges().end(), back.edges().begin(), back.edges().end()));
  std::istringstream bad("m 2\n0 5\n");
  CHECK_THROWS(Topology::from_edge_list(bad));
}

TEST_CASE("random trees used by the oracles are trees") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto t = oracle::random_tree(1 + seed % 30, seed);
    CHECK(t.is_tree());
    CHECK(t.is_connected());
    CHECK(adjacency_symmetric(t));
  }
}
