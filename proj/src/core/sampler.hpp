#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "core/graph.hpp"
#include "core/particles.hpp"
#include "core/random.hpp"

namespace colltrain {

/// A classifier in the network: particle `particle` of sensor `sensor`.
/// Sensors exchange trees by value; a reference is enough to recover one.
struct ClassifierRef {
  SensorId sensor = 0;
  std::uint32_t particle = 0;
  friend bool operator==(const ClassifierRef&, const ClassifierRef&) = default;
  friend auto operator<=>(const ClassifierRef&, const ClassifierRef&) = default;
};

/// Topology plus per-sensor particle sets. Precomputes, for every sensor,
/// the predictions of every classifier in the network on that sensor's rows,
/// which is what a sensor can compute after receiving a serialized tree.
class ParticleNetwork {
 public:
  ParticleNetwork(Topology topo, std::vector<ParticleSet> sets, KernelParams params = {});

  const Topology& topology() const noexcept { return topo_; }
  std::size_t num_sensors() const noexcept { return sets_.size(); }
  const ParticleSet& particle_set(SensorId s) const { return sets_.at(s); }
  const KernelParams& kernel_params() const noexcept { return params_; }

  const DecisionTree& tree(ClassifierRef f) const;
  std::size_t num_classifiers() const noexcept { return flat_.size(); }
  /// Every classifier, ordered by (sensor, particle).
  std::span<const ClassifierRef> classifiers() const noexcept { return flat_; }

  /// Predictions of f on sensor `evaluator`'s rows (tagged with `evaluator`).
  const PredictionVector& local_prediction(SensorId evaluator, ClassifierRef f) const;
  /// Predictions of f on the union of all shards (tagged kPooledRows).
  const PredictionVector& pooled_prediction(ClassifierRef f) const;

 private:
  std::size_t flat_index(ClassifierRef f) const;

  Topology topo_;
  std::vector<ParticleSet> sets_;
  KernelParams params_;
  std::vector<std::size_t> offset_;
  std::vector<ClassifierRef> flat_;
  std::vector<std::vector<PredictionVector>> local_;  // [evaluator][flat]
  std::vector<PredictionVector> pooled_;
};

enum class SamplerMode { kGibbs, kGreedy };
enum class SweepOrder { kRandomSensor, kFixedPermutation };

struct SamplerConfig {
  std::size_t rounds = 4000;  // single-site updates
  SamplerMode mode = SamplerMode::kGreedy;
  std::uint64_t seed = 0;
  SweepOrder order = SweepOrder::kRandomSensor;
  std::size_t trace_interval = 100;  // 0 records only the start and the end
};

struct SamplerState {
  std::vector<ClassifierRef> current;
  std::size_t round = 0;
  Rng rng;
  /// Visit order for kFixedPermutation; empty means uniform random sites.
  std::vector<SensorId> sweep;
};

/// Index of the particle maximizing sum_j K(h_j, f) on local rows; ties to the lowest.
std::uint32_t local_init(const ParticleSet& ps, const KernelParams& p = {});

/// Every sensor at its local_init particle. The site-selection stream is
/// derive_seed(seed, "sampler/sites"); the fixed permutation, if any, comes
/// from derive_seed(seed, "sampler/sweep").
SamplerState initial_state(const ParticleNetwork& net, std::uint64_t seed,
                           SweepOrder order = SweepOrder::kRandomSensor);

struct Candidate {
  ClassifierRef ref;
  bool own = false;
  double weight = 0.0;
};

/// Candidates for sensor s: its own particles in index order, then its
/// neighbors' current samples in neighbor order, keeping only the first of
/// any group with equal predictions on s's rows. Weight of f is
///   prod_{t in N(s)} sigma(f_t, f) * sum_j K(h_sj, f)
/// with every kernel evaluated on s's rows. Unnormalized.
std::vector<Candidate> conditional_weights(SensorId s, const SamplerState& state,
                                           const ParticleNetwork& net);

/// Next site under the state's sweep policy; advances the rng for random sites.
SensorId select_site(SamplerState& state, std::size_t num_sensors);

/// Redraws f_s from the normalized conditional weights; keeps f_s when all are zero.
void gibbs_update(SensorId s, SamplerState& state, const ParticleNetwork& net);

/// Sets f_s to the highest-weight candidate. The incumbent f_s competes too
/// (appended last), so the site's conditional objective never decreases.
/// Ties go to own particles first, then the lowest candidate position.
void greedy_update(SensorId s, SamplerState& state, const ParticleNetwork& net);

/// select_site, then the update; round is incremented.
void gibbs_step(SamplerState& state, const ParticleNetwork& net);
void greedy_step(SamplerState& state, const ParticleNetwork& net);

struct TraceRow {
  std::size_t round = 0;
  SensorId sensor = 0;
  double test_error = 0.0;
};

struct SamplerRun {
  SamplerState final_state;
  std::vector<TraceRow> trace;
  std::vector<double> errors_before;
  std::vector<double> errors_after;
};

/// Starts from initial_state(net, cfg.seed, cfg.order) and performs
/// cfg.rounds single-site updates, recording every sensor's held-out error
/// at round 0, every trace_interval rounds, and at the end.
SamplerRun run_sampler(const SamplerConfig& cfg, const ParticleNetwork& net,
                       const CategoricalDataset& test);

enum class EvaluationPolicy { kLocal, kPooled };

/// prod_s sum_j K(h_sj, f); local evaluates factor s on s's rows, pooled on all rows.
double map_objective(ClassifierRef f, const ParticleNetwork& net, EvaluationPolicy policy);

struct MapSolution {
  ClassifierRef ref;
  double objective = 0.0;
};

/// Exhaustive argmax of map_objective over every particle in the network;
/// ties to the lowest (sensor, particle).
MapSolution brute_force_map(const ParticleNetwork& net, EvaluationPolicy policy);

/// Held-out error of each sensor's local_init classifier.
std::vector<double> noncollaborative_baseline(const ParticleNetwork& net,
                                              const CategoricalDataset& test);

/// Middle value, or the mean of the two middle values for even counts.
double median(std::vector<double> values);

}  // namespace colltrain
