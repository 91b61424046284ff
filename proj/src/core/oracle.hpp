#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/sampler.hpp"

namespace colltrain::oracle {

// Small-instance verification. Everything here recomputes kernels,
// candidate sets and objectives from raw prediction bits, independently of
// the sampler's own code paths, and compares.

struct InstanceSpec {
  std::size_t sensors = 2;
  std::size_t particles = 2;
  std::size_t rows_per_shard = 10;
  std::uint64_t seed = 0;
};

/// Random small network: synthetic binary data dealt into shards, bootstrap
/// particles of depth <= 2, random graph (two sensors are always linked).
ParticleNetwork make_instance(const InstanceSpec& spec);

/// Exact long-run distribution of the Gibbs chain over joint states, started
/// from initial_state(net, seed). Indexed by sum_s flat(f_s) * N^s.
std::vector<double> gibbs_stationary(const ParticleNetwork& net, std::uint64_t seed);

struct GibbsCheck {
  double total_variation = 0.0;
  std::size_t states = 0;
};

/// Runs `steps` Gibbs steps and compares the visit frequencies of joint states
/// with gibbs_stationary.
GibbsCheck check_gibbs(const ParticleNetwork& net, std::size_t steps, std::uint64_t seed);

struct GreedyCheck {
  std::size_t comparisons = 0;
  std::size_t mismatches = 0;
};

/// For `trials` random joint states and every site, compares greedy_update
/// against an exhaustive per-site argmax.
GreedyCheck check_greedy(const ParticleNetwork& net, std::size_t trials, std::uint64_t seed);

struct MapCheck {
  bool local_match = false;
  bool pooled_match = false;
};

/// brute_force_map against a plain double loop, for both policies (exact equality).
MapCheck check_brute_force_map(const ParticleNetwork& net);

struct DiscreteCheck {
  std::size_t instances = 0;
  std::size_t agreements = 0;
};

/// Random connected trees (1 to max_sensors nodes) with random positive
/// weights: discrete_bp_map against the centralized likelihood product.
DiscreteCheck check_discrete_equivalence(std::size_t instances, std::size_t max_sensors,
                                         std::uint64_t seed);

/// Uniformly random labelled tree on m nodes, shuffled labels.
Topology random_tree(std::size_t m, std::uint64_t seed);

}  // namespace colltrain::oracle
