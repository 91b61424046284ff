#pragma once

#include <array>
#include <span>
#include <vector>

#include "core/graph.hpp"

namespace colltrain {

/// Unnormalized local likelihoods of the two hypotheses.
struct DiscretePotential {
  double weight0 = 1.0;
  double weight1 = 1.0;
};

enum class Hypothesis : int { kH0 = 0, kH1 = 1 };

/// Two-state sum-product on a forest. The edge potential is [[1, d], [d, 1]];
/// d = 0 is the exact agreement (Dirac) potential, d > 0 relaxes it.
/// Each sensor decides by the argmax of its marginal, ties to H0.
///
/// Throws LoopyGraphError when `topo` has a cycle, InvalidArgument on
/// negative weights, weights summing to zero, or d outside [0, 1].
std::vector<Hypothesis> discrete_bp_map(const Topology& topo,
                                        std::span<const DiscretePotential> potentials,
                                        double relaxation = 0.0);

/// Log marginals (up to a constant) from the same pass, shifted so the larger entry is 0.
std::vector<std::array<double, 2>> discrete_bp_marginals(
    const Topology& topo, std::span<const DiscretePotential> potentials,
    double relaxation = 0.0);

}  // namespace colltrain
