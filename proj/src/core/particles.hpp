#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "core/dataset.hpp"
#include "core/decision_tree.hpp"
#include "core/graph.hpp"
#include "core/prediction.hpp"

namespace colltrain {

/// One sensor's bootstrapped classifiers together with its private rows and
/// each classifier's predictions on those rows (tagged with the owner id).
class ParticleSet {
 public:
  ParticleSet(SensorId owner, std::vector<DecisionTree> particles, CategoricalDataset local_data);

  SensorId owner() const noexcept { return owner_; }
  std::size_t size() const noexcept { return particles_.size(); }
  const std::vector<DecisionTree>& particles() const noexcept { return particles_; }
  const CategoricalDataset& local_data() const noexcept { return local_data_; }
  std::span<const PredictionVector> local_predictions() const noexcept { return predictions_; }

  /// Predictions of an arbitrary (e.g. received) tree on this sensor's rows.
  PredictionVector evaluate_locally(const DecisionTree& tree) const;

 private:
  SensorId owner_;
  std::vector<DecisionTree> particles_;
  CategoricalDataset local_data_;
  std::vector<PredictionVector> predictions_;
};

/// Draws n_s bootstrap resamples of the shard and trains one tree on each.
/// Resample k uses the stream derive_seed(seed, "bootstrap", k).
ParticleSet bootstrap_particles(SensorId owner, const CategoricalDataset& shard,
                                std::size_t n_particles, const TreeParams& params,
                                std::uint64_t seed);

/// Trains one particle per given resample (row indices into the shard).
ParticleSet particles_from_resamples(SensorId owner, const CategoricalDataset& shard,
                                     std::span<const std::vector<std::size_t>> resamples,
                                     const TreeParams& params);

/// Row indices of the k-th bootstrap resample used by bootstrap_particles.
std::vector<std::size_t> bootstrap_indices(std::size_t n, std::uint64_t seed, std::size_t k);

/// sum_j K(h_j, f) over the set's particles, evaluated on its own rows only.
/// Throws InvalidArgument if f was computed on another sensor's rows or its
/// length differs from the local row count.
double local_rho(const ParticleSet& ps, const PredictionVector& f, const KernelParams& p = {});

/// Per-row majority over all trees, ties to 0. Throws on an empty list.
PredictionVector majority_vote(std::span<const DecisionTree> trees, const CategoricalDataset& data);
PredictionVector majority_vote(std::span<const DecisionTree* const> trees,
                               const CategoricalDataset& data);

}  // namespace colltrain
