#include "core/experiments.hpp"

#include <cstdio>
#include <set>

#include "core/errors.hpp"
#include "core/random.hpp"

namespace colltrain {

ClassifyResult run_classify_experiment(const ClassifyConfig& cfg) {
  if (cfg.dataset_path.empty()) {
    SyntheticSpec spec = cfg.synthetic;
    spec.seed = derive_seed(cfg.seed, "classify/synthetic");
    return run_classify_experiment(cfg, synthetic_categorical(spec).data);
  }
  return run_classify_experiment(cfg, load_categorical_csv(cfg.dataset_path).data);
}

ClassifyResult run_classify_experiment(const ClassifyConfig& cfg, const CategoricalDataset& data) {
  if (cfg.sensors == 0) throw InvalidArgument("classify: need at least one sensor");
  if (cfg.particles == 0) throw InvalidArgument("classify: need at least one particle");
  if (cfg.train_count > data.size()) {
    throw InvalidArgument("classify: train_count exceeds dataset size");
  }
  const std::size_t test_count = cfg.test_count ? cfg.test_count : data.size() - cfg.train_count;
  if (test_count == 0) throw InvalidArgument("classify: no rows left for testing");

  const auto split = split_and_shard(
      data, SplitSpec{cfg.train_count, test_count, cfg.sensors,
                      derive_seed(cfg.seed, "classify/split")});
  auto topo = Topology::random_expected_degree(cfg.sensors, cfg.degree,
                                               derive_seed(cfg.seed, "classify/topology"));
  std::vector<ParticleSet> sets;
  for (SensorId s = 0; s < cfg.sensors; ++s) {
    sets.push_back(bootstrap_particles(s, split.shards[s], cfg.particles, cfg.tree,
                                       derive_seed(cfg.seed, "classify/particles", s)));
  }

  ClassifyResult out;
  out.dataset_rows = data.size();
  out.num_features = data.num_features();
  out.test_rows = split.test.size();
  out.topology_edges = topo.num_edges();

  const ParticleNetwork net(std::move(topo), std::move(sets), cfg.kernel);
  const auto& test = split.test;
  auto& sum = out.summary;

  const auto train = CategoricalDataset::concat(split.shards);
  sum.centralized_tree_error = error_rate(train_tree(train, cfg.tree), test);
  sum.map_local_error = error_rate(net.tree(brute_force_map(net, EvaluationPolicy::kLocal).ref), test);
  sum.map_pooled_error =
      error_rate(net.tree(brute_force_map(net, EvaluationPolicy::kPooled).ref), test);

  std::vector<const DecisionTree*> all;
  for (const auto& f : net.classifiers()) all.push_back(&net.tree(f));
  sum.majority_vote_error = disagreement(majority_vote(all, test), test.labels());

  SamplerConfig sc = cfg.sampler;
  sc.seed = derive_seed(cfg.seed, "classify/sampler");
  out.run = run_sampler(sc, net, test);
  sum.noncollaborative_median = median(out.run.errors_before);
  sum.sampler_median = median(out.run.errors_after);
  std::set<ClassifierRef> distinct(out.run.final_state.current.begin(),
                                   out.run.final_state.current.end());
  sum.distinct_final_classifiers = distinct.size();
  return out;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string rounds_csv(const std::vector<RoundMetrics>& rounds) {
  std::string out = "round,test_error,estimate_variance\n";
  for (const auto& r : rounds) {
    out += std::to_string(r.round) + ',' + format_number(r.test_error) + ',' +
           format_number(r.estimate_variance) + '\n';
  }
  return out;
}

std::string marginals_csv(const std::vector<GaussianMarginal>& marginals) {
  std::string out = "sensor,mean,variance\n";
  for (std::size_t s = 0; s < marginals.size(); ++s) {
    out += std::to_string(s) + ',' + format_number(marginals[s].mean) + ',' +
           format_number(marginals[s].variance) + '\n';
  }
  return out;
}

std::string bp_trace_csv(const BpReport& report) {
  std::string out = "round,max_message_delta\n";
  for (std::size_t i = 0; i < report.delta_trace.size(); ++i) {
    out += std::to_string(i + 1) + ',' + format_number(report.delta_trace[i]) + '\n';
  }
  return out;
}

std::string trace_csv(const std::vector<TraceRow>& trace) {
  std::string out = "round,sensor,test_error\n";
  for (const auto& r : trace) {
    out += std::to_string(r.round) + ',' + std::to_string(r.sensor) + ',' +
           format_number(r.test_error) + '\n';
  }
  return out;
}

std::string histogram_csv(const std::vector<double>& before, const std::vector<double>& after) {
  if (before.size() != after.size()) throw InvalidArgument("histogram: length mismatch");
  std::string out = "sensor,test_error_before,test_error_after\n";
  for (std::size_t s = 0; s < before.size(); ++s) {
    out += std::to_string(s) + ',' + format_number(before[s]) + ',' + format_number(after[s]) +
           '\n';
  }
  return out;
}

}  // namespace colltrain
