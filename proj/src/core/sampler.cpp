#include "core/sampler.hpp"

#include <algorithm>
#include <numeric>

#include "core/errors.hpp"

namespace colltrain {

ParticleNetwork::ParticleNetwork(Topology topo, std::vector<ParticleSet> sets, KernelParams params)
    : topo_(std::move(topo)), sets_(std::move(sets)), params_(params) {
  if (sets_.size() != topo_.num_sensors()) {
    throw InvalidArgument("particle network: need one particle set per sensor");
  }
  for (std::size_t s = 0; s < sets_.size(); ++s) {
    if (sets_[s].owner() != s) {
      throw InvalidArgument("particle network: particle set " + std::to_string(s) +
                            " is owned by sensor " + std::to_string(sets_[s].owner()));
    }
    offset_.push_back(flat_.size());
    for (std::uint32_t j = 0; j < sets_[s].size(); ++j) {
      flat_.push_back(ClassifierRef{static_cast<SensorId>(s), j});
    }
  }
  local_.resize(sets_.size());
  for (std::size_t s = 0; s < sets_.size(); ++s) {
    local_[s].reserve(flat_.size());
    for (const auto& f : flat_) local_[s].push_back(sets_[s].evaluate_locally(tree(f)));
  }
  std::vector<CategoricalDataset> shards;
  for (const auto& ps : sets_) shards.push_back(ps.local_data());
  const auto pooled_rows = CategoricalDataset::concat(shards);
  for (const auto& f : flat_) {
    pooled_.push_back(predict(tree(f), pooled_rows));
    pooled_.back().set_eval_set(kPooledRows);
  }
}

std::size_t ParticleNetwork::flat_index(ClassifierRef f) const {
  if (f.sensor >= sets_.size() || f.particle >= sets_[f.sensor].size()) {
    throw OutOfRange("particle network: no classifier (" + std::to_string(f.sensor) + ", " +
                     std::to_string(f.particle) + ")");
  }
  return offset_[f.sensor] + f.particle;
}

const DecisionTree& ParticleNetwork::tree(ClassifierRef f) const {
  flat_index(f);
  return sets_[f.sensor].particles()[f.particle];
}

const PredictionVector& ParticleNetwork::local_prediction(SensorId evaluator,
                                                          ClassifierRef f) const {
  if (evaluator >= sets_.size()) throw OutOfRange("particle network: evaluator out of range");
  return local_[evaluator][flat_index(f)];
}

const PredictionVector& ParticleNetwork::pooled_prediction(ClassifierRef f) const {
  return pooled_[flat_index(f)];
}

std::uint32_t local_init(const ParticleSet& ps, const KernelParams& p) {
  std::uint32_t best = 0;
  double best_value = -1.0;
  const auto preds = ps.local_predictions();
  for (std::uint32_t i = 0; i < preds.size(); ++i) {
    const double v = local_rho(ps, preds[i], p);
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }
  return best;
}

SamplerState initial_state(const ParticleNetwork& net, std::uint64_t seed, SweepOrder order) {
  SamplerState st{{}, 0, Rng(derive_seed(seed, "sampler/sites")), {}};
  for (SensorId s = 0; s < net.num_sensors(); ++s) {
    st.current.push_back(ClassifierRef{s, local_init(net.particle_set(s), net.kernel_params())});
  }
  if (order == SweepOrder::kFixedPermutation) {
    st.sweep.resize(net.num_sensors());
    std::iota(st.sweep.begin(), st.sweep.end(), SensorId{0});
    Rng perm_rng(derive_seed(seed, "sampler/sweep"));
    for (std::size_t i = st.sweep.size(); i > 1; --i) {
      std::swap(st.sweep[i - 1], st.sweep[uniform_index(perm_rng, i)]);
    }
  }
  return st;
}

namespace {

double candidate_weight(SensorId s, ClassifierRef f, const SamplerState& state,
                        const ParticleNetwork& net) {
  const auto& kp = net.kernel_params();
  const PredictionVector& pf = net.local_prediction(s, f);
  double w = local_rho(net.particle_set(s), pf, kp);
  for (SensorId t : net.topology().neighbors(s)) {
    w *= edge_similarity(net.local_prediction(s, state.current[t]), pf, kp);
  }
  return w;
}

void push_unique(std::vector<Candidate>& out, SensorId s, ClassifierRef ref, bool own,
                 const ParticleNetwork& net) {
  const PredictionVector& p = net.local_prediction(s, ref);
  for (const auto& c : out) {
    if (net.local_prediction(s, c.ref) == p) return;
  }
  out.push_back(Candidate{ref, own, 0.0});
}

void check_state(const SamplerState& state, const ParticleNetwork& net) {
  if (state.current.size() != net.num_sensors()) {
    throw InvalidArgument("sampler: state does not cover every sensor");
  }
}

}  // namespace

std::vector<Candidate> conditional_weights(SensorId s, const SamplerState& state,
                                           const ParticleNetwork& net) {
  check_state(state, net);
  std::vector<Candidate> out;
  const auto& ps = net.particle_set(s);
  for (std::uint32_t j = 0; j < ps.size(); ++j) push_unique(out, s, ClassifierRef{s, j}, true, net);
  for (SensorId t : net.topology().neighbors(s)) push_unique(out, s, state.current[t], false, net);
  for (auto& c : out) c.weight = candidate_weight(s, c.ref, state, net);
  return out;
}

SensorId select_site(SamplerState& state, std::size_t num_sensors) {
  if (num_sensors == 0) throw InvalidArgument("sampler: no sensors");
  if (!state.sweep.empty()) return state.sweep[state.round % state.sweep.size()];
  return static_cast<SensorId>(uniform_index(state.rng, num_sensors));
}

void gibbs_update(SensorId s, SamplerState& state, const ParticleNetwork& net) {
  const auto cands = conditional_weights(s, state, net);
  double total = 0.0;
  for (const auto& c : cands) total += c.weight;
  const double u = uniform01(state.rng) * total;
  if (!(total > 0.0)) return;
  double acc = 0.0;
  for (const auto& c : cands) {
    if (c.weight <= 0.0) continue;
    acc += c.weight;
    state.current[s] = c.ref;
    if (u < acc) break;
  }
}

void greedy_update(SensorId s, SamplerState& state, const ParticleNetwork& net) {
  auto cands = conditional_weights(s, state, net);
  const std::size_t before = cands.size();
  push_unique(cands, s, state.current[s], false, net);
  if (cands.size() > before) cands.back().weight = candidate_weight(s, state.current[s], state, net);
  // Own particles lead the list, so a strict comparison settles ties as required.
  const Candidate* best = &cands.front();
  for (const auto& c : cands) {
    if (c.weight > best->weight) best = &c;
  }
  state.current[s] = best->ref;
}

void gibbs_step(SamplerState& state, const ParticleNetwork& net) {
  const SensorId s = select_site(state, net.num_sensors());
  gibbs_update(s, state, net);
  ++state.round;
}

void greedy_step(SamplerState& state, const ParticleNetwork& net) {
  const SensorId s = select_site(state, net.num_sensors());
  greedy_update(s, state, net);
  ++state.round;
}

SamplerRun run_sampler(const SamplerConfig& cfg, const ParticleNetwork& net,
                       const CategoricalDataset& test) {
  std::vector<double> test_error(net.num_classifiers());
  for (std::size_t i = 0; i < net.num_classifiers(); ++i) {
    test_error[i] = error_rate(net.tree(net.classifiers()[i]), test);
  }
  auto error_of = [&](ClassifierRef f) {
    const auto all = net.classifiers();
    const auto it = std::lower_bound(all.begin(), all.end(), f);
    return test_error[static_cast<std::size_t>(it - all.begin())];
  };

  SamplerRun run{initial_state(net, cfg.seed, cfg.order), {}, {}, {}};
  auto record = [&](std::vector<double>* sink) {
    for (SensorId s = 0; s < net.num_sensors(); ++s) {
      const double e = error_of(run.final_state.current[s]);
      run.trace.push_back(TraceRow{run.final_state.round, s, e});
      if (sink) sink->push_back(e);
    }
  };
  record(&run.errors_before);
  for (std::size_t r = 0; r < cfg.rounds; ++r) {
    if (cfg.mode == SamplerMode::kGibbs) {
      gibbs_step(run.final_state, net);
    } else {
      greedy_step(run.final_state, net);
    }
    const bool last = r + 1 == cfg.rounds;
    if (!last && cfg.trace_interval > 0 && run.final_state.round % cfg.trace_interval == 0) {
      record(nullptr);
    }
  }
  if (cfg.rounds > 0) {
    record(&run.errors_after);
  } else {
    run.errors_after = run.errors_before;
  }
  return run;
}

double map_objective(ClassifierRef f, const ParticleNetwork& net, EvaluationPolicy policy) {
  const auto& kp = net.kernel_params();
  double product = 1.0;
  for (SensorId s = 0; s < net.num_sensors(); ++s) {
    const auto& ps = net.particle_set(s);
    double sum = 0.0;
    if (policy == EvaluationPolicy::kLocal) {
      sum = local_rho(ps, net.local_prediction(s, f), kp);
    } else {
      const auto& pf = net.pooled_prediction(f);
      for (std::uint32_t j = 0; j < ps.size(); ++j) {
        sum += kernel(net.pooled_prediction(ClassifierRef{s, j}), pf, kp);
      }
    }
    product *= sum;
  }
  return product;
}

MapSolution brute_force_map(const ParticleNetwork& net, EvaluationPolicy policy) {
  MapSolution best{net.classifiers().front(), -1.0};
  for (const auto& f : net.classifiers()) {
    const double v = map_objective(f, net, policy);
    if (v > best.objective) best = MapSolution{f, v};
  }
  return best;
}

std::vector<double> noncollaborative_baseline(const ParticleNetwork& net,
                                              const CategoricalDataset& test) {
  std::vector<double> out;
  for (SensorId s = 0; s < net.num_sensors(); ++s) {
    const auto& ps = net.particle_set(s);
    out.push_back(error_rate(ps.particles()[local_init(ps, net.kernel_params())], test));
  }
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) throw InvalidArgument("median: empty list");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace colltrain
