#include "colltrain/colltrain.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "core/discrete_bp.hpp"
#include "core/errors.hpp"
#include "core/experiments.hpp"
#include "core/gaussian_bp.hpp"
#include "core/graph.hpp"
#include "core/oracle.hpp"
#include "core/random.hpp"
#include "core/regression.hpp"

using namespace colltrain;

struct ct_topology {
  Topology topo;
};

struct ct_bp_result {
  BpResult result;
};

struct ct_regress_result {
  RegressionResult result;
};

struct ct_classify_result {
  ClassifyResult result;
};

struct ct_oracle_report {
  struct Check {
    std::string name;
    bool passed;
    std::string detail;
  };
  std::vector<Check> checks;
};

struct ct_dataset {
  LoadedDataset loaded;
};

namespace {

thread_local std::string g_last_error;

ct_status fail(ct_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

// Runs fn, translating exceptions into status codes.
template <class Fn>
ct_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return CT_OK;
  } catch (const InvalidArgument& e) {
    return fail(CT_INVALID_ARGUMENT, e.what());
  } catch (const OutOfRange& e) {
    return fail(CT_OUT_OF_RANGE, e.what());
  } catch (const NumericalError& e) {
    return fail(CT_NUMERICAL_FAILURE, e.what());
  } catch (const DataError& e) {
    return fail(CT_DATA_ERROR, e.what());
  } catch (const IoError& e) {
    return fail(CT_IO_ERROR, e.what());
  } catch (const LoopyGraphError& e) {
    return fail(CT_LOOPY_GRAPH, e.what());
  } catch (const std::exception& e) {
    return fail(CT_INTERNAL_ERROR, e.what());
  } catch (...) {
    return fail(CT_INTERNAL_ERROR, "unknown exception");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require(const void* p, const char* what) {
  if (!p) throw InvalidArgument(std::string(what) + " must not be NULL");
}

BpConfig to_core(const ct_bp_config& c) {
  BpConfig out;
  out.max_rounds = c.max_rounds;
  out.convergence_tol = c.convergence_tol;
  if (c.schedule != CT_SCHEDULE_SYNCHRONOUS && c.schedule != CT_SCHEDULE_SEQUENTIAL) {
    throw InvalidArgument("unknown bp schedule");
  }
  out.schedule = c.schedule == CT_SCHEDULE_SEQUENTIAL ? BpSchedule::kSequential
                                                      : BpSchedule::kSynchronous;
  out.initial_message = GaussianMessage{c.initial_message.mean, c.initial_message.variance};
  return out;
}

ct_gaussian to_c(double mean, double variance) { return ct_gaussian{mean, variance}; }

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace

extern "C" {

const char* ct_status_name(ct_status status) {
  switch (status) {
    case CT_OK: return "ok";
    case CT_INVALID_ARGUMENT: return "invalid argument";
    case CT_OUT_OF_RANGE: return "out of range";
    case CT_NUMERICAL_FAILURE: return "numerical failure";
    case CT_DATA_ERROR: return "data error";
    case CT_IO_ERROR: return "i/o error";
    case CT_LOOPY_GRAPH: return "loopy graph";
    case CT_INTERNAL_ERROR: return "internal error";
  }
  return "unknown status";
}

const char* ct_last_error(void) { return g_last_error.c_str(); }
const char* ct_version(void) { return "0.1.0"; }
void ct_string_free(char* s) { std::free(s); }

// ---- topology

ct_status ct_topology_random_geometric(size_t m, double radius, uint64_t seed, ct_topology** out) {
  return guarded([&] {
    require(out, "out");
    *out = new ct_topology{Topology::random_geometric(m, radius, seed)};
  });
}

ct_status ct_topology_random_expected_degree(size_t m, double expected_degree, uint64_t seed,
                                             ct_topology** out) {
  return guarded([&] {
    require(out, "out");
    *out = new ct_topology{Topology::random_expected_degree(m, expected_degree, seed)};
  });
}

ct_status ct_topology_from_edges(size_t m, const uint32_t* endpoints, size_t num_edges,
                                 ct_topology** out) {
  return guarded([&] {
    require(out, "out");
    if (num_edges > 0) require(endpoints, "endpoints");
    std::vector<std::pair<SensorId, SensorId>> edges;
    for (size_t e = 0; e < num_edges; ++e) edges.emplace_back(endpoints[2 * e], endpoints[2 * e + 1]);
    *out = new ct_topology{Topology(m, edges)};
  });
}

ct_status ct_topology_parse_edge_list(const char* text, ct_topology** out) {
  return guarded([&] {
    require(text, "text");
    require(out, "out");
    std::istringstream in(text);
    *out = new ct_topology{Topology::from_edge_list(in)};
  });
}

void ct_topology_free(ct_topology* topo) { delete topo; }
size_t ct_topology_num_sensors(const ct_topology* topo) { return topo ? topo->topo.num_sensors() : 0; }
size_t ct_topology_num_edges(const ct_topology* topo) { return topo ? topo->topo.num_edges() : 0; }

ct_status ct_topology_edge(const ct_topology* topo, size_t index, uint32_t* a, uint32_t* b) {
  return guarded([&] {
    require(topo, "topo");
    if (index >= topo->topo.num_edges()) throw OutOfRange("edge index out of range");
    const Edge e = topo->topo.edges()[index];
    if (a) *a = e.a;
    if (b) *b = e.b;
  });
}

ct_status ct_topology_neighbors(const ct_topology* topo, uint32_t s, uint32_t* out,
                                size_t capacity, size_t* count) {
  return guarded([&] {
    require(topo, "topo");
    const auto nbrs = topo->topo.neighbors(s);
    if (count) *count = nbrs.size();
    if (capacity > 0) require(out, "out");
    for (size_t i = 0; i < nbrs.size() && i < capacity; ++i) out[i] = nbrs[i];
  });
}

ct_status ct_topology_is_tree(const ct_topology* topo, int* is_tree) {
  return guarded([&] {
    require(topo, "topo");
    require(is_tree, "is_tree");
    *is_tree = topo->topo.is_tree() ? 1 : 0;
  });
}

ct_status ct_topology_edge_list(const ct_topology* topo, char** text) {
  return guarded([&] {
    require(topo, "topo");
    require(text, "text");
    *text = dup_string(topo->topo.to_edge_list());
  });
}

// ---- Gaussian message passing

void ct_bp_config_default(ct_bp_config* cfg) {
  if (!cfg) return;
  const BpConfig d;
  cfg->max_rounds = d.max_rounds;
  cfg->convergence_tol = d.convergence_tol;
  cfg->schedule = CT_SCHEDULE_SYNCHRONOUS;
  cfg->initial_message = to_c(d.initial_message.mean, d.initial_message.variance);
}

ct_status ct_gaussian_message_update(const ct_gaussian* local, const ct_gaussian* incoming,
                                     size_t num_incoming, double lambda_sq, ct_gaussian* out) {
  return guarded([&] {
    require(local, "local");
    require(out, "out");
    if (num_incoming > 0) require(incoming, "incoming");
    if (!(local->variance > 0.0)) throw InvalidArgument("local variance must be > 0");
    std::vector<GaussianMessage> in;
    for (size_t i = 0; i < num_incoming; ++i) {
      if (!(incoming[i].variance > 0.0)) throw InvalidArgument("incoming variance must be > 0");
      in.push_back(GaussianMessage{incoming[i].mean, incoming[i].variance});
    }
    const auto m = gaussian_message_update(GaussianPotential{local->mean, local->variance}, in,
                                           EdgeSmoothness{lambda_sq});
    *out = to_c(m.mean, m.variance);
  });
}

ct_status ct_precision_weighted_average(const ct_gaussian* potentials, size_t n, double* out) {
  return guarded([&] {
    require(out, "out");
    if (n > 0) require(potentials, "potentials");
    std::vector<GaussianPotential> p;
    for (size_t i = 0; i < n; ++i) p.push_back({potentials[i].mean, potentials[i].variance});
    *out = precision_weighted_average(p);
  });
}

ct_status ct_gaussian_bp(const ct_topology* topo, const ct_gaussian* potentials,
                         const double* lambda_sq, const ct_bp_config* cfg, ct_bp_result** out) {
  return guarded([&] {
    require(topo, "topo");
    require(out, "out");
    const auto& t = topo->topo;
    if (t.num_sensors() > 0) require(potentials, "potentials");
    if (t.num_edges() > 0) require(lambda_sq, "lambda_sq");
    std::vector<GaussianPotential> pots;
    for (size_t s = 0; s < t.num_sensors(); ++s) pots.push_back({potentials[s].mean, potentials[s].variance});
    std::vector<EdgeSmoothness> smooth;
    for (size_t e = 0; e < t.num_edges(); ++e) smooth.push_back({lambda_sq[e]});
    ct_bp_config c;
    ct_bp_config_default(&c);
    if (cfg) c = *cfg;
    *out = new ct_bp_result{run_gaussian_bp(t, pots, smooth, to_core(c))};
  });
}

void ct_bp_result_free(ct_bp_result* r) { delete r; }

ct_status ct_bp_result_marginal(const ct_bp_result* r, uint32_t s, ct_gaussian* out) {
  return guarded([&] {
    require(r, "result");
    require(out, "out");
    if (s >= r->result.marginals.size()) throw OutOfRange("sensor out of range");
    *out = to_c(r->result.marginals[s].mean, r->result.marginals[s].variance);
  });
}

size_t ct_bp_result_rounds(const ct_bp_result* r) { return r ? r->result.report.rounds : 0; }
int ct_bp_result_converged(const ct_bp_result* r) { return r && r->result.report.converged ? 1 : 0; }

ct_status ct_bp_result_trace_csv(const ct_bp_result* r, char** csv) {
  return guarded([&] {
    require(r, "result");
    require(csv, "csv");
    *csv = dup_string(bp_trace_csv(r->result.report));
  });
}

ct_status ct_discrete_bp_map(const ct_topology* topo, const double* weights, double relaxation,
                             int* decisions) {
  return guarded([&] {
    require(topo, "topo");
    const size_t m = topo->topo.num_sensors();
    if (m > 0) {
      require(weights, "weights");
      require(decisions, "decisions");
    }
    std::vector<DiscretePotential> pots;
    for (size_t s = 0; s < m; ++s) pots.push_back({weights[2 * s], weights[2 * s + 1]});
    const auto d = discrete_bp_map(topo->topo, pots, relaxation);
    for (size_t s = 0; s < m; ++s) decisions[s] = static_cast<int>(d[s]);
  });
}

// ---- regression

void ct_regress_config_default(ct_regress_config* cfg) {
  if (!cfg) return;
  const RegressionConfig d;
  cfg->num_sensors = d.num_sensors;
  cfg->radius = d.radius;
  cfg->true_slope = d.true_slope;
  cfg->noise_scale = d.noise_scale;
  cfg->bootstrap_reps = d.bootstrap_reps;
  cfg->lambda_sq = d.lambda_sq;
  cfg->seed = d.seed;
  cfg->test_grid_size = d.test_grid_size;
  ct_bp_config_default(&cfg->bp);
}

ct_status ct_regress_run(const ct_regress_config* cfg, ct_regress_result** out) {
  return guarded([&] {
    require(cfg, "cfg");
    require(out, "out");
    RegressionConfig c;
    c.num_sensors = cfg->num_sensors;
    c.radius = cfg->radius;
    c.true_slope = cfg->true_slope;
    c.noise_scale = cfg->noise_scale;
    c.bootstrap_reps = cfg->bootstrap_reps;
    c.lambda_sq = cfg->lambda_sq;
    c.seed = cfg->seed;
    c.test_grid_size = cfg->test_grid_size;
    c.bp = to_core(cfg->bp);
    *out = new ct_regress_result{run_regression_experiment(c)};
  });
}

void ct_regress_free(ct_regress_result* r) { delete r; }
size_t ct_regress_num_rounds(const ct_regress_result* r) { return r ? r->result.rounds.size() : 0; }

ct_status ct_regress_round(const ct_regress_result* r, size_t i, ct_round_metrics* out) {
  return guarded([&] {
    require(r, "result");
    require(out, "out");
    if (i >= r->result.rounds.size()) throw OutOfRange("round index out of range");
    const auto& m = r->result.rounds[i];
    *out = ct_round_metrics{m.round, m.test_error, m.estimate_variance};
  });
}

size_t ct_regress_num_sensors(const ct_regress_result* r) { return r ? r->result.marginals.size() : 0; }

ct_status ct_regress_marginal(const ct_regress_result* r, uint32_t s, ct_gaussian* out) {
  return guarded([&] {
    require(r, "result");
    require(out, "out");
    if (s >= r->result.marginals.size()) throw OutOfRange("sensor out of range");
    *out = to_c(r->result.marginals[s].mean, r->result.marginals[s].variance);
  });
}

ct_status ct_regress_potential(const ct_regress_result* r, uint32_t s, ct_gaussian* out) {
  return guarded([&] {
    require(r, "result");
    require(out, "out");
    if (s >= r->result.potentials.size()) throw OutOfRange("sensor out of range");
    *out = to_c(r->result.potentials[s].mean, r->result.potentials[s].variance);
  });
}

void ct_regress_centralized(const ct_regress_result* r, double* slope, double* test_error) {
  if (!r) return;
  if (slope) *slope = r->result.centralized_slope;
  if (test_error) *test_error = r->result.centralized_test_error;
}

int ct_regress_converged(const ct_regress_result* r) { return r && r->result.report.converged ? 1 : 0; }
size_t ct_regress_num_unidentifiable(const ct_regress_result* r) {
  return r ? r->result.unidentifiable.size() : 0;
}

ct_status ct_regress_rounds_csv(const ct_regress_result* r, char** csv) {
  return guarded([&] {
    require(r, "result");
    require(csv, "csv");
    *csv = dup_string(rounds_csv(r->result.rounds));
  });
}

ct_status ct_regress_marginals_csv(const ct_regress_result* r, char** csv) {
  return guarded([&] {
    require(r, "result");
    require(csv, "csv");
    *csv = dup_string(marginals_csv(r->result.marginals));
  });
}

ct_status ct_regress_bp_trace_csv(const ct_regress_result* r, char** csv) {
  return guarded([&] {
    require(r, "result");
    require(csv, "csv");
    *csv = dup_string(bp_trace_csv(r->result.report));
  });
}

// ---- classify

void ct_classify_config_default(ct_classify_config* cfg) {
  if (!cfg) return;
  const ClassifyConfig d;
  cfg->dataset_path = nullptr;
  cfg->synthetic_rows = d.synthetic.rows;
  cfg->synthetic_features = d.synthetic.features;
  cfg->synthetic_arity = d.synthetic.arity;
  cfg->synthetic_rule_depth = d.synthetic.rule_depth;
  cfg->synthetic_noise = d.synthetic.noise_rate;
  cfg->sensors = d.sensors;
  cfg->degree = d.degree;
  cfg->particles = d.particles;
  cfg->train_count = d.train_count;
  cfg->test_count = d.test_count;
  cfg->max_depth = d.tree.max_depth;
  cfg->min_leaf = d.tree.min_leaf;
  cfg->kernel_exponent = d.kernel.kernel_exponent;
  cfg->similarity_power = d.kernel.similarity_power;
  cfg->rounds = d.sampler.rounds;
  cfg->mode = CT_MODE_GREEDY;
  cfg->order = CT_ORDER_RANDOM;
  cfg->trace_interval = d.sampler.trace_interval;
  cfg->seed = d.seed;
}

ct_status ct_classify_run(const ct_classify_config* cfg, ct_classify_result** out) {
  return guarded([&] {
    require(cfg, "cfg");
    require(out, "out");
    ClassifyConfig c;
    c.dataset_path = cfg->dataset_path ? cfg->dataset_path : "";
    c.synthetic.rows = cfg->synthetic_rows;
    c.synthetic.features = cfg->synthetic_features;
    c.synthetic.arity = cfg->synthetic_arity;
    c.synthetic.rule_depth = cfg->synthetic_rule_depth;
    c.synthetic.noise_rate = cfg->synthetic_noise;
    c.sensors = cfg->sensors;
    c.degree = cfg->degree;
    c.particles = cfg->particles;
    c.train_count = cfg->train_count;
    c.test_count = cfg->test_count;
    c.tree = TreeParams{cfg->max_depth, cfg->min_leaf};
    if (cfg->kernel_exponent < 1 || cfg->similarity_power < 1) {
      throw InvalidArgument("kernel exponent and similarity power must be >= 1");
    }
    c.kernel = KernelParams{cfg->kernel_exponent, cfg->similarity_power};
    c.sampler.rounds = cfg->rounds;
    if (cfg->mode != CT_MODE_GREEDY && cfg->mode != CT_MODE_GIBBS) {
      throw InvalidArgument("unknown sampler mode");
    }
    c.sampler.mode = cfg->mode == CT_MODE_GIBBS ? SamplerMode::kGibbs : SamplerMode::kGreedy;
    if (cfg->order != CT_ORDER_RANDOM && cfg->order != CT_ORDER_FIXED_PERMUTATION) {
      throw InvalidArgument("unknown sweep order");
    }
    c.sampler.order = cfg->order == CT_ORDER_FIXED_PERMUTATION ? SweepOrder::kFixedPermutation
                                                               : SweepOrder::kRandomSensor;
    c.sampler.trace_interval = cfg->trace_interval;
    c.seed = cfg->seed;
    *out = new ct_classify_result{run_classify_experiment(c)};
  });
}

void ct_classify_free(ct_classify_result* r) { delete r; }

void ct_classify_get_summary(const ct_classify_result* r, ct_classify_summary* out) {
  if (!r || !out) return;
  const auto& s = r->result.summary;
  *out = ct_classify_summary{s.centralized_tree_error,
                             s.map_local_error,
                             s.map_pooled_error,
                             s.noncollaborative_median,
                             s.sampler_median,
                             s.majority_vote_error,
                             s.distinct_final_classifiers,
                             r->result.dataset_rows,
                             r->result.num_features,
                             r->result.test_rows,
                             r->result.topology_edges};
}

ct_status ct_classify_trace_csv(const ct_classify_result* r, char** csv) {
  return guarded([&] {
    require(r, "result");
    require(csv, "csv");
    *csv = dup_string(trace_csv(r->result.run.trace));
  });
}

ct_status ct_classify_histogram_csv(const ct_classify_result* r, char** csv) {
  return guarded([&] {
    require(r, "result");
    require(csv, "csv");
    *csv = dup_string(histogram_csv(r->result.run.errors_before, r->result.run.errors_after));
  });
}

// ---- oracle

void ct_oracle_config_default(ct_oracle_config* cfg) {
  if (!cfg) return;
  *cfg = ct_oracle_config{CT_ORACLE_MAX_SENSORS, CT_ORACLE_MAX_PARTICLES, 50, 10, 100000, 100, 0};
}

ct_status ct_oracle_run(const ct_oracle_config* cfg, ct_oracle_report** out) {
  return guarded([&] {
    require(cfg, "cfg");
    require(out, "out");
    if (cfg->sensors < 1 || cfg->sensors > CT_ORACLE_MAX_SENSORS) {
      throw InvalidArgument("oracle: sensors must lie in [1, " +
                            std::to_string(CT_ORACLE_MAX_SENSORS) + "]");
    }
    if (cfg->particles < 1 || cfg->particles > CT_ORACLE_MAX_PARTICLES) {
      throw InvalidArgument("oracle: particles must lie in [1, " +
                            std::to_string(CT_ORACLE_MAX_PARTICLES) + "]");
    }
    auto report = std::make_unique<ct_oracle_report>();
    char buf[160];

    {
      double worst = 0.0;
      const size_t gm = std::min<size_t>(cfg->sensors, 2);
      const size_t gn = std::min<size_t>(cfg->particles, 2);
      for (size_t k = 0; k < cfg->gibbs_instances; ++k) {
        const auto net = oracle::make_instance(
            {gm, gn, 10, derive_seed(cfg->seed, "oracle/gibbs", k)});
        const auto c = oracle::check_gibbs(net, cfg->gibbs_steps, derive_seed(cfg->seed, "oracle/gibbs-run", k));
        worst = std::max(worst, c.total_variation);
      }
      std::snprintf(buf, sizeof buf, "%zu instances of %zu sensors x %zu particles, %zu steps, max TV %.4f (limit 0.05)",
                    cfg->gibbs_instances, gm, gn, cfg->gibbs_steps, worst);
      report->checks.push_back({"gibbs_stationary", worst <= 0.05, buf});
    }
    {
      size_t comparisons = 0, mismatches = 0, map_fail = 0;
      for (size_t k = 0; k < cfg->instances; ++k) {
        const auto net = oracle::make_instance(
            {cfg->sensors, cfg->particles, 10, derive_seed(cfg->seed, "oracle/greedy", k)});
        const auto g = oracle::check_greedy(net, 5, derive_seed(cfg->seed, "oracle/greedy-run", k));
        comparisons += g.comparisons;
        mismatches += g.mismatches;
        const auto m = oracle::check_brute_force_map(net);
        map_fail += !(m.local_match && m.pooled_match);
      }
      std::snprintf(buf, sizeof buf, "%zu site updates over %zu instances, %zu mismatches",
                    comparisons, cfg->instances, mismatches);
      report->checks.push_back({"greedy_site_argmax", mismatches == 0, buf});
      std::snprintf(buf, sizeof buf, "%zu instances, %zu disagreements with double loop",
                    cfg->instances, map_fail);
      report->checks.push_back({"brute_force_map", map_fail == 0, buf});
    }
    {
      const auto d = oracle::check_discrete_equivalence(cfg->discrete_instances, 30,
                                                        derive_seed(cfg->seed, "oracle/discrete"));
      std::snprintf(buf, sizeof buf, "%zu/%zu tree instances agree with the likelihood product",
                    d.agreements, d.instances);
      report->checks.push_back({"discrete_bp_equivalence", d.agreements == d.instances, buf});
    }
    *out = report.release();
  });
}

void ct_oracle_free(ct_oracle_report* r) { delete r; }
size_t ct_oracle_num_checks(const ct_oracle_report* r) { return r ? r->checks.size() : 0; }

ct_status ct_oracle_check(const ct_oracle_report* r, size_t i, const char** name, int* passed,
                          const char** detail) {
  return guarded([&] {
    require(r, "report");
    if (i >= r->checks.size()) throw OutOfRange("check index out of range");
    const auto& c = r->checks[i];
    if (name) *name = c.name.c_str();
    if (passed) *passed = c.passed ? 1 : 0;
    if (detail) *detail = c.detail.c_str();
  });
}

// ---- datasets

ct_status ct_dataset_load(const char* path, ct_dataset** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new ct_dataset{load_categorical_csv(path)};
  });
}

void ct_dataset_free(ct_dataset* ds) { delete ds; }
size_t ct_dataset_rows(const ct_dataset* ds) { return ds ? ds->loaded.data.size() : 0; }
size_t ct_dataset_features(const ct_dataset* ds) { return ds ? ds->loaded.data.num_features() : 0; }

ct_status ct_dataset_write_shards(const ct_dataset* ds, size_t train_count, size_t test_count,
                                  size_t num_shards, uint64_t seed, const char* out_dir) {
  return guarded([&] {
    require(ds, "dataset");
    require(out_dir, "out_dir");
    const auto split = split_and_shard(
        ds->loaded.data,
        SplitSpec{train_count, test_count, num_shards, derive_seed(seed, "classify/split")});
    const std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    for (size_t k = 0; k < split.shards.size(); ++k) {
      write_file(dir / ("shard_" + std::to_string(k) + ".csv"),
                 format_categorical_csv(split.shards[k], ds->loaded.mapping));
    }
    write_file(dir / "test.csv", format_categorical_csv(split.test, ds->loaded.mapping));
  });
}

}  // extern "C"
