#include "core/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "core/discrete_bp.hpp"
#include "core/errors.hpp"
#include "core/random.hpp"

namespace colltrain::oracle {
namespace {

std::size_t bit_distance(const PredictionVector& a, const PredictionVector& b) {
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
  return d;
}

bool same_bits(const PredictionVector& a, const PredictionVector& b) {
  return a.size() == b.size() && bit_distance(a, b) == 0;
}

double plain_kernel(const PredictionVector& a, const PredictionVector& b, const KernelParams& p) {
  const double agree =
      1.0 - static_cast<double>(bit_distance(a, b)) / static_cast<double>(a.size());
  return std::pow(agree, p.kernel_exponent);
}

double plain_similarity(const PredictionVector& a, const PredictionVector& b,
                        const KernelParams& p) {
  return std::pow(plain_kernel(a, b, p), p.similarity_power);
}

std::size_t flat(const ParticleNetwork& net, ClassifierRef f) {
  const auto all = net.classifiers();
  return static_cast<std::size_t>(std::find(all.begin(), all.end(), f) - all.begin());
}

struct Weighted {
  ClassifierRef ref;
  double weight;
};

// Algorithm-1 candidate set of site s under joint assignment `cur`, with weights.
std::vector<Weighted> site_distribution(const ParticleNetwork& net, SensorId s,
                                        const std::vector<ClassifierRef>& cur,
                                        bool include_incumbent) {
  const auto& kp = net.kernel_params();
  std::vector<ClassifierRef> refs;
  for (std::uint32_t j = 0; j < net.particle_set(s).size(); ++j) refs.push_back({s, j});
  for (SensorId t : net.topology().neighbors(s)) refs.push_back(cur[t]);
  if (include_incumbent) refs.push_back(cur[s]);

  std::vector<Weighted> out;
  for (const auto& r : refs) {
    const auto& pr = net.local_prediction(s, r);
    bool dup = false;
    for (const auto& w : out) dup = dup || same_bits(net.local_prediction(s, w.ref), pr);
    if (dup) continue;
    double rho = 0.0;
    for (std::uint32_t j = 0; j < net.particle_set(s).size(); ++j) {
      rho += plain_kernel(net.local_prediction(s, {s, j}), pr, kp);
    }
    double w = rho;
    for (SensorId t : net.topology().neighbors(s)) {
      w *= plain_similarity(net.local_prediction(s, cur[t]), pr, kp);
    }
    out.push_back({r, w});
  }
  return out;
}

}  // namespace

ParticleNetwork make_instance(const InstanceSpec& spec) {
  if (spec.sensors == 0 || spec.particles == 0 || spec.rows_per_shard == 0) {
    throw InvalidArgument("oracle instance: sizes must be positive");
  }
  SyntheticSpec syn;
  syn.rows = spec.sensors * spec.rows_per_shard;
  syn.features = 4;
  syn.arity = 2;
  syn.rule_depth = 2;
  syn.noise_rate = 0.25;
  syn.seed = derive_seed(spec.seed, "oracle/data");
  const auto data = synthetic_categorical(syn).data;
  const auto split = split_and_shard(
      data, SplitSpec{syn.rows, 0, spec.sensors, derive_seed(spec.seed, "oracle/split")});

  Topology topo = spec.sensors == 2
                      ? Topology(2, std::vector<std::pair<SensorId, SensorId>>{{0, 1}})
                      : Topology::random_expected_degree(
                            spec.sensors, 0.6 * static_cast<double>(spec.sensors - 1),
                            derive_seed(spec.seed, "oracle/topology"));
  std::vector<ParticleSet> sets;
  for (SensorId s = 0; s < spec.sensors; ++s) {
    sets.push_back(bootstrap_particles(s, split.shards[s], spec.particles, TreeParams{2, 1},
                                       derive_seed(spec.seed, "oracle/particles", s)));
  }
  return ParticleNetwork(std::move(topo), std::move(sets));
}

std::vector<double> gibbs_stationary(const ParticleNetwork& net, std::uint64_t seed) {
  const std::size_t m = net.num_sensors();
  const std::size_t n = net.num_classifiers();
  std::size_t states = 1;
  for (std::size_t s = 0; s < m; ++s) states *= n;
  if (states > 200000) throw InvalidArgument("oracle: joint state space too large to enumerate");

  auto decode = [&](std::size_t x) {
    std::vector<ClassifierRef> cur(m);
    for (std::size_t s = 0; s < m; ++s) {
      cur[s] = net.classifiers()[x % n];
      x /= n;
    }
    return cur;
  };
  auto encode = [&](const std::vector<ClassifierRef>& cur) {
    std::size_t x = 0;
    for (std::size_t s = m; s-- > 0;) x = x * n + flat(net, cur[s]);
    return x;
  };

  // Sparse transition rows.
  std::vector<std::vector<std::pair<std::size_t, double>>> rows(states);
  for (std::size_t x = 0; x < states; ++x) {
    const auto cur = decode(x);
    for (SensorId s = 0; s < m; ++s) {
      const auto dist = site_distribution(net, s, cur, false);
      double total = 0.0;
      for (const auto& w : dist) total += w.weight;
      if (!(total > 0.0)) {
        rows[x].emplace_back(x, 1.0 / static_cast<double>(m));
        continue;
      }
      for (const auto& w : dist) {
        if (w.weight <= 0.0) continue;
        auto next = cur;
        next[s] = w.ref;
        rows[x].emplace_back(encode(next), w.weight / total / static_cast<double>(m));
      }
    }
  }

  std::vector<double> pi(states, 0.0), nxt(states);
  pi[encode(initial_state(net, seed).current)] = 1.0;
  // Lazy chain: same stationary law, no periodicity.
  for (std::size_t it = 0; it < 2000000; ++it) {
    for (std::size_t x = 0; x < states; ++x) nxt[x] = 0.5 * pi[x];
    for (std::size_t x = 0; x < states; ++x) {
      if (pi[x] == 0.0) continue;
      for (auto [y, p] : rows[x]) nxt[y] += 0.5 * pi[x] * p;
    }
    double change = 0.0;
    for (std::size_t x = 0; x < states; ++x) change += std::abs(nxt[x] - pi[x]);
    pi.swap(nxt);
    if (change < 1e-14) break;
  }
  return pi;
}

GibbsCheck check_gibbs(const ParticleNetwork& net, std::size_t steps, std::uint64_t seed) {
  const auto pi = gibbs_stationary(net, seed);
  const std::size_t n = net.num_classifiers();
  std::vector<double> visits(pi.size(), 0.0);
  auto st = initial_state(net, seed);
  for (std::size_t i = 0; i < steps; ++i) {
    gibbs_step(st, net);
    std::size_t x = 0;
    for (std::size_t s = net.num_sensors(); s-- > 0;) x = x * n + flat(net, st.current[s]);
    visits[x] += 1.0;
  }
  GibbsCheck out{0.0, pi.size()};
  for (std::size_t x = 0; x < pi.size(); ++x) {
    out.total_variation += std::abs(visits[x] / static_cast<double>(steps) - pi[x]);
  }
  out.total_variation *= 0.5;
  return out;
}

GreedyCheck check_greedy(const ParticleNetwork& net, std::size_t trials, std::uint64_t seed) {
  Rng rng(seed);
  GreedyCheck out;
  const auto all = net.classifiers();
  for (std::size_t trial = 0; trial < trials; ++trial) {
    SamplerState st{{}, 0, Rng(seed), {}};
    for (std::size_t s = 0; s < net.num_sensors(); ++s) {
      st.current.push_back(all[uniform_index(rng, all.size())]);
    }
    for (SensorId s = 0; s < net.num_sensors(); ++s) {
      const auto dist = site_distribution(net, s, st.current, true);
      const Weighted* best = &dist.front();
      for (const auto& w : dist) {
        if (w.weight > best->weight) best = &w;
      }
      auto probe = st;
      greedy_update(s, probe, net);
      ++out.comparisons;
      bool same = probe.current[s] == best->ref;
      for (SensorId t = 0; t < net.num_sensors(); ++t) {
        same = same && (t == s || probe.current[t] == st.current[t]);
      }
      out.mismatches += !same;
    }
  }
  return out;
}

MapCheck check_brute_force_map(const ParticleNetwork& net) {
  const auto& kp = net.kernel_params();
  auto loop = [&](bool pooled) {
    ClassifierRef best_ref{};
    double best = -1.0;
    for (SensorId a = 0; a < net.num_sensors(); ++a) {
      for (std::uint32_t i = 0; i < net.particle_set(a).size(); ++i) {
        const ClassifierRef f{a, i};
        double product = 1.0;
        for (SensorId s = 0; s < net.num_sensors(); ++s) {
          double sum = 0.0;
          for (std::uint32_t j = 0; j < net.particle_set(s).size(); ++j) {
            sum += pooled ? plain_kernel(net.pooled_prediction({s, j}), net.pooled_prediction(f), kp)
                          : plain_kernel(net.local_prediction(s, {s, j}),
                                         net.local_prediction(s, f), kp);
          }
          product *= sum;
        }
        if (product > best) {
          best = product;
          best_ref = f;
        }
      }
    }
    return MapSolution{best_ref, best};
  };
  const auto local = brute_force_map(net, EvaluationPolicy::kLocal);
  const auto pooled = brute_force_map(net, EvaluationPolicy::kPooled);
  const auto local_ref = loop(false);
  const auto pooled_ref = loop(true);
  return MapCheck{local.ref == local_ref.ref && local.objective == local_ref.objective,
                  pooled.ref == pooled_ref.ref && pooled.objective == pooled_ref.objective};
}

Topology random_tree(std::size_t m, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<SensorId> label(m);
  std::iota(label.begin(), label.end(), SensorId{0});
  for (std::size_t i = m; i > 1; --i) std::swap(label[i - 1], label[uniform_index(rng, i)]);
  std::vector<std::pair<SensorId, SensorId>> edges;
  for (std::size_t i = 1; i < m; ++i) {
    edges.emplace_back(label[i], label[uniform_index(rng, i)]);
  }
  return Topology(m, edges);
}

DiscreteCheck check_discrete_equivalence(std::size_t instances, std::size_t max_sensors,
                                         std::uint64_t seed) {
  DiscreteCheck out;
  for (std::size_t k = 0; k < instances; ++k) {
    Rng rng(derive_seed(seed, "oracle/discrete", k));
    const std::size_t m = 1 + uniform_index(rng, max_sensors);
    const auto topo = random_tree(m, rng());
    std::vector<DiscretePotential> w(m);
    double log0 = 0.0, log1 = 0.0;
    for (auto& p : w) {
      p.weight0 = 1.0 - uniform01(rng);  // (0, 1]
      p.weight1 = 1.0 - uniform01(rng);
      log0 += std::log(p.weight0);
      log1 += std::log(p.weight1);
    }
    const Hypothesis central = log1 > log0 ? Hypothesis::kH1 : Hypothesis::kH0;
    const auto decisions = discrete_bp_map(topo, w);
    ++out.instances;
    out.agreements += std::all_of(decisions.begin(), decisions.end(),
                                  [&](Hypothesis h) { return h == central; });
  }
  return out;
}

}  // namespace colltrain::oracle
