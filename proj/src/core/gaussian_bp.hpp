#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "core/graph.hpp"

namespace colltrain {

/// Local potential rho_s(x) = exp(-(x - mean)^2 / (2 variance)).
struct GaussianPotential {
  double mean = 0.0;
  double variance = 1.0;
};

/// Edge potential exp(-(x_s - x_t)^2 / (2 lambda_sq)). lambda_sq -> 0 forces consensus.
struct EdgeSmoothness {
  double lambda_sq = 0.0;
};

struct GaussianMessage {
  double mean = 0.0;
  double variance = 1.0;
};

struct GaussianMarginal {
  double mean = 0.0;
  double variance = 1.0;
};

enum class BpSchedule { kSynchronous, kSequential };

struct BpConfig {
  std::size_t max_rounds = 1000;
  /// Stop once max over directed edges of |d mean| + |d variance| drops below this.
  double convergence_tol = 1e-10;
  BpSchedule schedule = BpSchedule::kSynchronous;
  GaussianMessage initial_message{0.0, 1.0};
};

struct BpReport {
  std::size_t rounds = 0;
  bool converged = false;
  /// Max message delta of each round, rounds numbered from 1.
  std::vector<double> delta_trace;
};

struct BpResult {
  std::vector<GaussianMarginal> marginals;
  BpReport report;
};

/// Message t -> s from t's local potential, the messages reaching t from its
/// other neighbors, and the smoothness of edge {t, s}:
///   precision = 1/var_t + sum_u 1/var_ut
///   mean      = (mean_t/var_t + sum_u mean_ut/var_ut) / precision
///   variance  = lambda_sq + 1/precision
/// Throws NumericalError if any result is non-finite or the variance is not positive.
GaussianMessage gaussian_message_update(const GaussianPotential& local,
                                        std::span<const GaussianMessage> incoming,
                                        EdgeSmoothness edge);

/// Fuses a local potential with every incoming message (no smoothness term).
GaussianMarginal gaussian_marginal(const GaussianPotential& local,
                                   std::span<const GaussianMessage> incoming);

/// Called after every round with that round's number and the marginals implied
/// by the current message table. Observation only; it cannot alter the run.
using BpRoundObserver =
    std::function<void(std::size_t round, std::span<const GaussianMarginal>)>;

/// Scalar Gaussian sum-product over `topo`. `smoothness` is indexed like
/// topo.edges(). Exact on forests; on loopy graphs it runs anyway and
/// reports whether it converged within cfg.max_rounds.
///
/// The synchronous schedule reads only the previous round's table, so every
/// directed-edge update within a round is independent of the others.
BpResult run_gaussian_bp(const Topology& topo, std::span<const GaussianPotential> potentials,
                         std::span<const EdgeSmoothness> smoothness, const BpConfig& cfg,
                         const BpRoundObserver& observer = {});

/// Gaussian mode.
inline double map_estimate(const GaussianMarginal& m) { return m.mean; }

/// sum(mean/var) / sum(1/var). Throws InvalidArgument on an empty list.
double precision_weighted_average(std::span<const GaussianPotential> potentials);

}  // namespace colltrain
