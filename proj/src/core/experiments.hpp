#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/dataset.hpp"
#include "core/decision_tree.hpp"
#include "core/prediction.hpp"
#include "core/regression.hpp"
#include "core/sampler.hpp"

namespace colltrain {

struct ClassifyConfig {
  std::string dataset_path;  // empty: synthetic data
  SyntheticSpec synthetic{};  // seed is replaced by derive_seed(seed, "classify/synthetic")
  std::size_t sensors = 20;
  double degree = 4.0;
  std::size_t particles = 4;
  std::size_t train_count = 2000;
  std::size_t test_count = 0;  // 0: every row not used for training
  TreeParams tree{};
  KernelParams kernel{};
  SamplerConfig sampler{};  // seed is replaced by derive_seed(seed, "classify/sampler")
  std::uint64_t seed = 0;
};

struct ClassifySummary {
  double centralized_tree_error = 0.0;
  double map_local_error = 0.0;   // brute-force maximizer, kernels on local rows
  double map_pooled_error = 0.0;  // brute-force maximizer, kernels on all rows
  double noncollaborative_median = 0.0;
  double sampler_median = 0.0;
  double majority_vote_error = 0.0;
  std::size_t distinct_final_classifiers = 0;
};

struct ClassifyResult {
  ClassifySummary summary;
  SamplerRun run;
  std::size_t dataset_rows = 0;
  std::size_t num_features = 0;
  std::size_t test_rows = 0;
  std::size_t topology_edges = 0;
};

/// Split into shards and a test set, random expected-degree topology,
/// bootstrap particles per sensor, sampler run, and every baseline row.
/// Randomness: "classify/split", "classify/topology", "classify/particles"[s],
/// "classify/sampler" under cfg.seed.
ClassifyResult run_classify_experiment(const ClassifyConfig& cfg);
ClassifyResult run_classify_experiment(const ClassifyConfig& cfg, const CategoricalDataset& data);

// CSV writers. Numbers are printed with %.17g so re-runs compare byte for byte.
std::string rounds_csv(const std::vector<RoundMetrics>& rounds);
std::string marginals_csv(const std::vector<GaussianMarginal>& marginals);
std::string bp_trace_csv(const BpReport& report);
std::string trace_csv(const std::vector<TraceRow>& trace);
std::string histogram_csv(const std::vector<double>& before, const std::vector<double>& after);

std::string format_number(double v);

}  // namespace colltrain
