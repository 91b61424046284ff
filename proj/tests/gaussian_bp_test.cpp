#include <cmath>
#include <limits>

#include "doctest.h"

#include "core/errors.hpp"
#include "core/gaussian_bp.hpp"
#include "core/oracle.hpp"
#include "support.hpp"

using namespace colltrain;
using colltrain::testing::uniform;

namespace {

using Pairs = std::vector<std::pair<SensorId, SensorId>>;

struct TreeInstance {
  Topology topo;
  std::vector<GaussianPotential> potentials;
};

TreeInstance random_instance(std::uint64_t seed, std::size_t max_m = 50) {
  Rng rng(derive_seed(seed, "test/bp-instance"));
  const std::size_t m = 1 + uniform_index(rng, max_m);
  TreeInstance out{oracle::random_tree(m, derive_seed(seed, "test/bp-tree")), {}};
  for (std::size_t s = 0; s < m; ++s) {
    out.potentials.push_back({uniform(rng, -5.0, 5.0), uniform(rng, 0.1, 10.0)});
  }
  return out;
}

std::vector<EdgeSmoothness> uniform_smoothness(const Topology& t, double lambda_sq) {
  return std::vector<EdgeSmoothness>(t.num_edges(), EdgeSmoothness{lambda_sq});
}

}  // namespace

TEST_CASE("message update examples") {
  const auto leaf = gaussian_message_update({2.0, 1.0}, {}, {0.0});
  CHECK(leaf.mean == 2.0);
  CHECK(leaf.variance == 1.0);
  const auto inflated = gaussian_message_update({2.0, 1.0}, {}, {0.5});
  CHECK(inflated.mean == 2.0);
  CHECK(inflated.variance == 1.5);
  const GaussianMessage in[] = {{0.0, 1.0}};
  const auto fused = gaussian_message_update({2.0, 1.0}, in, {0.0});
  CHECK(fused.mean == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(fused.variance == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("message update reports non-finite results") {
  const GaussianMessage in[] = {{std::numeric_limits<double>::infinity(), 1.0}};
  CHECK_THROWS_AS(gaussian_message_update({0.0, 1.0}, in, {0.0}), NumericalError);
  CHECK_THROWS_AS(gaussian_message_update({0.0, 0.0}, {}, {0.0}), NumericalError);
}

TEST_CASE("precision weighted average") {
  const GaussianPotential a[] = {{0.0, 1.0}, {2.0, 1.0}};
  CHECK(precision_weighted_average(a) == 1.0);
  const GaussianPotential b[] = {{0.0, 1.0}, {3.0, 0.5}};
  CHECK(precision_weighted_average(b) == doctest::Approx(2.0).epsilon(1e-15));
  const GaussianPotential c[] = {{5.0, 2.0}};
  CHECK(precision_weighted_average(c) == 5.0);
  CHECK_THROWS_AS(precision_weighted_average({}), InvalidArgument);
}

TEST_CASE("map estimate is the marginal mean") {
  CHECK(map_estimate({1.5, 0.2}) == 1.5);
  CHECK(map_estimate({0.0, 1.0}) == 0.0);
}

TEST_CASE("single sensor marginal is its potential") {
  const Topology t(1, Pairs{});
  const GaussianPotential p[] = {{3.0, 2.0}};
  const auto r = run_gaussian_bp(t, p, {}, BpConfig{});
  CHECK(r.marginals[0].mean == 3.0);
  CHECK(r.marginals[0].variance == 2.0);
}

TEST_CASE("two sensors on one edge fuse to the midpoint") {
  const Topology t(2, Pairs{{0, 1}});
  const GaussianPotential p[] = {{0.0, 1.0}, {2.0, 1.0}};
  const EdgeSmoothness e[] = {{1e-16}};
  const auto r = run_gaussian_bp(t, p, e, BpConfig{});
  CHECK(r.report.converged);

  // Reference variance by quadrature: with lambda_sq -> 0 the joint density
  // concentrates on x0 = x1, so the marginal is proportional to
  // exp(-x^2/2 - (x-2)^2/2). Simpson's rule on [-12, 14].
  const int n = 200000;
  const double lo = -12.0, hi = 14.0, h = (hi - lo) / n;
  double z = 0.0, m1 = 0.0, m2 = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = lo + i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    const double d = w * std::exp(-0.5 * x * x - 0.5 * (x - 2.0) * (x - 2.0));
    z += d;
    m1 += d * x;
    m2 += d * x * x;
  }
  const double mean = m1 / z;
  const double var = m2 / z - mean * mean;
  CHECK(std::abs(var - 0.5) < 1e-9);

  for (const auto& m : r.marginals) {
    CHECK(std::abs(m.mean - 1.0) < 1e-12);
    CHECK(std::abs(m.mean - mean) < 1e-9);
    CHECK(std::abs(m.variance - var) < 1e-9);
  }
}

TEST_CASE("tree exactness: messages freeze after diameter rounds") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto inst = random_instance(seed);
    const auto smooth = uniform_smoothness(inst.topo, 1e-8);
    const std::size_t d = inst.topo.diameter();
    BpConfig cfg;
    cfg.max_rounds = d + 5;
    cfg.convergence_tol = std::numeric_limits<double>::min();
    const auto run = run_gaussian_bp(inst.topo, inst.potentials, smooth, cfg);
    for (std::size_t r = d + 1; r <= run.report.delta_trace.size(); ++r) {
      CHECK(run.report.delta_trace[r - 1] <= 1e-12);
    }
    cfg.max_rounds = std::max<std::size_t>(d, 1);
    const auto at_d = run_gaussian_bp(inst.topo, inst.potentials, smooth, cfg);
    for (std::size_t s = 0; s < inst.potentials.size(); ++s) {
      CHECK(std::abs(at_d.marginals[s].mean - run.marginals[s].mean) <= 1e-12);
      CHECK(std::abs(at_d.marginals[s].variance - run.marginals[s].variance) <= 1e-12);
    }
  }
}

TEST_CASE("consensus limit on trees equals the precision weighted average") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto inst = random_instance(seed);
    const auto r = run_gaussian_bp(inst.topo, inst.potentials, uniform_smoothness(inst.topo, 1e-8),
                                   BpConfig{});
    CHECK(r.report.converged);
    const double target = precision_weighted_average(inst.potentials);
    for (const auto& m : r.marginals) CHECK(std::abs(map_estimate(m) - target) <= 1e-6);
  }
}

TEST_CASE("marginal variance never exceeds the local variance") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto inst = random_instance(seed, 30);
    for (auto schedule : {BpSchedule::kSynchronous, BpSchedule::kSequential}) {
      BpConfig cfg;
      cfg.schedule = schedule;
      const auto r =
          run_gaussian_bp(inst.topo, inst.potentials, uniform_smoothness(inst.topo, 0.0), cfg);
      for (std::size_t s = 0; s < inst.potentials.size(); ++s) {
        CHECK(r.marginals[s].variance <= inst.potentials[s].variance);
      }
    }
  }
  // Loopy graphs too: each fused message only adds precision.
  const auto g = Topology::random_geometric(30, 0.35, 5);
  std::vector<GaussianPotential> p;
  Rng rng(5);
  for (std::size_t s = 0; s < 30; ++s) p.push_back({uniform(rng, -5, 5), uniform(rng, 0.1, 10)});
  BpConfig cfg;
  cfg.max_rounds = 50;
  const auto r = run_gaussian_bp(g, p, uniform_smoothness(g, 0.0), cfg);
  for (std::size_t s = 0; s < p.size(); ++s) CHECK(r.marginals[s].variance <= p[s].variance);
}

TEST_CASE("sequential and synchronous schedules agree on trees") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto inst = random_instance(seed, 30);
    const auto smooth = uniform_smoothness(inst.topo, 0.3);
    BpConfig seq;
    seq.schedule = BpSchedule::kSequential;
    const auto a = run_gaussian_bp(inst.topo, inst.potentials, smooth, BpConfig{});
    const auto b = run_gaussian_bp(inst.topo, inst.potentials, smooth, seq);
    for (std::size_t s = 0; s < inst.potentials.size(); ++s) {
      CHECK(a.marginals[s].mean == doctest::Approx(b.marginals[s].mean).epsilon(1e-9));
      CHECK(a.marginals[s].variance == doctest::Approx(b.marginals[s].variance).epsilon(1e-9));
    }
  }
}

TEST_CASE("determinism: identical inputs give bit-identical outputs") {
  const auto g = Topology::random_geometric(40, 0.25, 11);
  std::vector<GaussianPotential> p;
  Rng rng(11);
  for (std::size_t s = 0; s < 40; ++s) p.push_back({uniform(rng, -5, 5), uniform(rng, 0.1, 10)});
  for (auto schedule : {BpSchedule::kSynchronous, BpSchedule::kSequential}) {
    BpConfig cfg;
    cfg.schedule = schedule;
    cfg.max_rounds = 200;
    const auto a = run_gaussian_bp(g, p, uniform_smoothness(g, 1e-4), cfg);
    const auto b = run_gaussian_bp(g, p, uniform_smoothness(g, 1e-4), cfg);
    CHECK(a.report.delta_trace == b.report.delta_trace);
    for (std::size_t s = 0; s < p.size(); ++s) {
      CHECK(a.marginals[s].mean == b.marginals[s].mean);
      CHECK(a.marginals[s].variance == b.marginals[s].variance);
    }
  }
}

TEST_CASE("loopy graphs run to the round cap and report non-convergence") {
  const Topology tri(3, Pairs{{0, 1}, {1, 2}, {0, 2}});
  const GaussianPotential p[] = {{0.0, 1.0}, {1.0, 1.0}, {5.0, 1.0}};
  const EdgeSmoothness e[] = {{0.0}, {0.0}, {0.0}};
  BpConfig cfg;
  cfg.max_rounds = 7;
  const auto r = run_gaussian_bp(tri, p, e, cfg);
  CHECK(r.report.rounds == 7);
  CHECK_FALSE(r.report.converged);
  CHECK(r.report.delta_trace.size() == 7);
}

TEST_CASE("observer sees every round") {
  const auto inst = random_instance(3, 20);
  std::size_t calls = 0;
  const auto r = run_gaussian_bp(
      inst.topo, inst.potentials, uniform_smoothness(inst.topo, 1e-8), BpConfig{},
      [&](std::size_t round, std::span<const GaussianMarginal> m) {
        ++calls;
        CHECK(round == calls);
        CHECK(m.size() == inst.potentials.size());
      });
  CHECK(calls == r.report.rounds);
}

TEST_CASE("bp input validation") {
  const Topology t(2, Pairs{{0, 1}});
  const GaussianPotential p[] = {{0.0, 1.0}, {2.0, 1.0}};
  const EdgeSmoothness e[] = {{0.0}};
  CHECK_THROWS_AS(run_gaussian_bp(t, std::span(p, 1), e, BpConfig{}), InvalidArgument);
  CHECK_THROWS_AS(run_gaussian_bp(t, p, {}, BpConfig{}), InvalidArgument);
  const GaussianPotential bad[] = {{0.0, -1.0}, {2.0, 1.0}};
  CHECK_THROWS_AS(run_gaussian_bp(t, bad, e, BpConfig{}), InvalidArgument);
  const EdgeSmoothness neg[] = {{-1.0}};
  CHECK_THROWS_AS(run_gaussian_bp(t, p, neg, BpConfig{}), InvalidArgument);
}
