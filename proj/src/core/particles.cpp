#include "core/particles.hpp"

#include "core/errors.hpp"
#include "core/random.hpp"

namespace colltrain {

ParticleSet::ParticleSet(SensorId owner, std::vector<DecisionTree> particles,
                         CategoricalDataset local_data)
    : owner_(owner), particles_(std::move(particles)), local_data_(std::move(local_data)) {
  if (particles_.empty()) throw InvalidArgument("particle set: need at least one particle");
  if (local_data_.empty()) throw InvalidArgument("particle set: empty local data");
  predictions_.reserve(particles_.size());
  for (const auto& tree : particles_) predictions_.push_back(evaluate_locally(tree));
}

PredictionVector ParticleSet::evaluate_locally(const DecisionTree& tree) const {
  PredictionVector v = predict(tree, local_data_);
  v.set_eval_set(owner_);
  return v;
}

std::vector<std::size_t> bootstrap_indices(std::size_t n, std::uint64_t seed, std::size_t k) {
  Rng rng(derive_seed(seed, "bootstrap", k));
  std::vector<std::size_t> idx(n);
  for (auto& i : idx) i = uniform_index(rng, n);
  return idx;
}

ParticleSet particles_from_resamples(SensorId owner, const CategoricalDataset& shard,
                                     std::span<const std::vector<std::size_t>> resamples,
                                     const TreeParams& params) {
  std::vector<DecisionTree> trees;
  trees.reserve(resamples.size());
  for (const auto& idx : resamples) trees.push_back(train_tree(shard.select(idx), params));
  return ParticleSet(owner, std::move(trees), shard);
}

ParticleSet bootstrap_particles(SensorId owner, const CategoricalDataset& shard,
                                std::size_t n_particles, const TreeParams& params,
                                std::uint64_t seed) {
  if (shard.empty()) throw InvalidArgument("bootstrap_particles: empty shard");
  if (n_particles == 0) throw InvalidArgument("bootstrap_particles: need n_particles >= 1");
  std::vector<std::vector<std::size_t>> resamples;
  for (std::size_t k = 0; k < n_particles; ++k) {
    resamples.push_back(bootstrap_indices(shard.size(), seed, k));
  }
  return particles_from_resamples(owner, shard, resamples, params);
}

double local_rho(const ParticleSet& ps, const PredictionVector& f, const KernelParams& p) {
  if (f.eval_set() != ps.owner() && f.eval_set() != kUntagged) {
    throw InvalidArgument("local_rho: prediction vector not computed on sensor " +
                          std::to_string(ps.owner()) + "'s rows");
  }
  if (f.size() != ps.local_data().size()) {
    throw InvalidArgument("local_rho: prediction vector length differs from local row count");
  }
  double sum = 0.0;
  for (const auto& h : ps.local_predictions()) sum += kernel(h, f, p);
  return sum;
}

PredictionVector majority_vote(std::span<const DecisionTree* const> trees,
                               const CategoricalDataset& data) {
  if (trees.empty()) throw InvalidArgument("majority_vote: no trees");
  std::vector<std::size_t> ones(data.size(), 0);
  for (const DecisionTree* t : trees) {
    const auto v = predict(*t, data);
    for (std::size_t i = 0; i < data.size(); ++i) ones[i] += v[i];
  }
  PredictionVector out(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) out.set(i, 2 * ones[i] > trees.size() ? 1 : 0);
  return out;
}

PredictionVector majority_vote(std::span<const DecisionTree> trees,
                               const CategoricalDataset& data) {
  std::vector<const DecisionTree*> ptrs;
  for (const auto& t : trees) ptrs.push_back(&t);
  return majority_vote(std::span<const DecisionTree* const>(ptrs), data);
}

}  // namespace colltrain
