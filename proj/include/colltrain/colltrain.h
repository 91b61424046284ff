/*
 * colltrain: collaborative training of estimators over a sensor network,
 * cast as inference on a graphical model whose variables live on each
 * sensor and whose edges are the communication links.
 *
 * C interface. Objects are opaque handles created by *_run / *_create style
 * functions and released with the matching *_free. Every fallible call
 * returns a ct_status; on failure ct_last_error() describes the problem.
 * Strings returned through char** are heap allocated and released with
 * ct_string_free.
 */
#ifndef COLLTRAIN_H
#define COLLTRAIN_H

#include <stddef.h>
#include <stdint.h>

#if defined(COLLTRAIN_BUILDING)
#define CT_API __attribute__((visibility("default")))
#else
#define CT_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ct_status {
  CT_OK = 0,
  CT_INVALID_ARGUMENT = 1,
  CT_OUT_OF_RANGE = 2,
  CT_NUMERICAL_FAILURE = 3,
  CT_DATA_ERROR = 4,
  CT_IO_ERROR = 5,
  CT_LOOPY_GRAPH = 6,
  CT_INTERNAL_ERROR = 7
} ct_status;

CT_API const char* ct_status_name(ct_status status);
/* Message of the last failed call on this thread; "" if none. */
CT_API const char* ct_last_error(void);
CT_API const char* ct_version(void);
CT_API void ct_string_free(char* s);

/* ---- topology ---------------------------------------------------------- */

typedef struct ct_topology ct_topology;

CT_API ct_status ct_topology_random_geometric(size_t m, double radius, uint64_t seed,
                                              ct_topology** out);
CT_API ct_status ct_topology_random_expected_degree(size_t m, double expected_degree,
                                                    uint64_t seed, ct_topology** out);
/* endpoints holds 2 * num_edges sensor ids. */
CT_API ct_status ct_topology_from_edges(size_t m, const uint32_t* endpoints, size_t num_edges,
                                        ct_topology** out);
/* Parses "m <count>" followed by "s t" lines. */
CT_API ct_status ct_topology_parse_edge_list(const char* text, ct_topology** out);
CT_API void ct_topology_free(ct_topology* topo);

CT_API size_t ct_topology_num_sensors(const ct_topology* topo);
CT_API size_t ct_topology_num_edges(const ct_topology* topo);
CT_API ct_status ct_topology_edge(const ct_topology* topo, size_t index, uint32_t* a, uint32_t* b);
/* Writes up to capacity sorted neighbor ids; *count receives the full degree. */
CT_API ct_status ct_topology_neighbors(const ct_topology* topo, uint32_t s, uint32_t* out,
                                       size_t capacity, size_t* count);
CT_API ct_status ct_topology_is_tree(const ct_topology* topo, int* is_tree);
CT_API ct_status ct_topology_edge_list(const ct_topology* topo, char** text);

/* ---- Gaussian message passing ------------------------------------------ */

typedef struct ct_gaussian {
  double mean;
  double variance;
} ct_gaussian;

typedef enum ct_schedule { CT_SCHEDULE_SYNCHRONOUS = 0, CT_SCHEDULE_SEQUENTIAL = 1 } ct_schedule;

typedef struct ct_bp_config {
  size_t max_rounds;
  double convergence_tol;
  ct_schedule schedule;
  ct_gaussian initial_message;
} ct_bp_config;

/* max_rounds 1000, tol 1e-10, synchronous, messages start at (0, 1). */
CT_API void ct_bp_config_default(ct_bp_config* cfg);

CT_API ct_status ct_gaussian_message_update(const ct_gaussian* local, const ct_gaussian* incoming,
                                            size_t num_incoming, double lambda_sq,
                                            ct_gaussian* out);
CT_API ct_status ct_precision_weighted_average(const ct_gaussian* potentials, size_t n,
                                               double* out);

typedef struct ct_bp_result ct_bp_result;

/* lambda_sq is indexed like ct_topology_edge. */
CT_API ct_status ct_gaussian_bp(const ct_topology* topo, const ct_gaussian* potentials,
                                const double* lambda_sq, const ct_bp_config* cfg,
                                ct_bp_result** out);
CT_API void ct_bp_result_free(ct_bp_result* r);
CT_API ct_status ct_bp_result_marginal(const ct_bp_result* r, uint32_t s, ct_gaussian* out);
CT_API size_t ct_bp_result_rounds(const ct_bp_result* r);
CT_API int ct_bp_result_converged(const ct_bp_result* r);
/* "round,max_message_delta" */
CT_API ct_status ct_bp_result_trace_csv(const ct_bp_result* r, char** csv);

/* weights holds (weight0, weight1) per sensor; decisions receives 0 (H0) or 1 (H1). */
CT_API ct_status ct_discrete_bp_map(const ct_topology* topo, const double* weights,
                                    double relaxation, int* decisions);

/* ---- regression consensus experiment ----------------------------------- */

typedef struct ct_regress_config {
  size_t num_sensors;
  double radius;
  double true_slope;
  double noise_scale;
  size_t bootstrap_reps;
  double lambda_sq;
  uint64_t seed;
  size_t test_grid_size;
  ct_bp_config bp;
} ct_regress_config;

typedef struct ct_round_metrics {
  size_t round;
  double test_error;
  double estimate_variance;
} ct_round_metrics;

typedef struct ct_regress_result ct_regress_result;

/* 50 sensors, radius 0.2, slope 1, noise scale 1, 100 resamples, lambda_sq 1e-8, seed 7. */
CT_API void ct_regress_config_default(ct_regress_config* cfg);
CT_API ct_status ct_regress_run(const ct_regress_config* cfg, ct_regress_result** out);
CT_API void ct_regress_free(ct_regress_result* r);
CT_API size_t ct_regress_num_rounds(const ct_regress_result* r);
CT_API ct_status ct_regress_round(const ct_regress_result* r, size_t i, ct_round_metrics* out);
CT_API size_t ct_regress_num_sensors(const ct_regress_result* r);
CT_API ct_status ct_regress_marginal(const ct_regress_result* r, uint32_t s, ct_gaussian* out);
CT_API ct_status ct_regress_potential(const ct_regress_result* r, uint32_t s, ct_gaussian* out);
CT_API void ct_regress_centralized(const ct_regress_result* r, double* slope, double* test_error);
CT_API int ct_regress_converged(const ct_regress_result* r);
CT_API size_t ct_regress_num_unidentifiable(const ct_regress_result* r);
CT_API ct_status ct_regress_rounds_csv(const ct_regress_result* r, char** csv);
CT_API ct_status ct_regress_marginals_csv(const ct_regress_result* r, char** csv);
CT_API ct_status ct_regress_bp_trace_csv(const ct_regress_result* r, char** csv);

/* ---- decision-tree particle experiment --------------------------------- */

typedef enum ct_sampler_mode { CT_MODE_GREEDY = 0, CT_MODE_GIBBS = 1 } ct_sampler_mode;
typedef enum ct_sweep_order { CT_ORDER_RANDOM = 0, CT_ORDER_FIXED_PERMUTATION = 1 } ct_sweep_order;

typedef struct ct_classify_config {
  const char* dataset_path; /* NULL or "" selects synthetic data */
  size_t synthetic_rows;
  size_t synthetic_features;
  uint16_t synthetic_arity;
  size_t synthetic_rule_depth;
  double synthetic_noise;
  size_t sensors;
  double degree;
  size_t particles;
  size_t train_count;
  size_t test_count; /* 0: all remaining rows */
  size_t max_depth;
  size_t min_leaf;
  int kernel_exponent;
  int similarity_power;
  size_t rounds;
  ct_sampler_mode mode;
  ct_sweep_order order;
  size_t trace_interval;
  uint64_t seed;
} ct_classify_config;

typedef struct ct_classify_summary {
  double centralized_tree_error;
  double map_local_error;
  double map_pooled_error;
  double noncollaborative_median;
  double sampler_median;
  double majority_vote_error;
  size_t distinct_final_classifiers;
  size_t dataset_rows;
  size_t num_features;
  size_t test_rows;
  size_t topology_edges;
} ct_classify_summary;

typedef struct ct_classify_result ct_classify_result;

/* 20 sensors, degree 4, 4 particles, 2000 training rows, 4000 greedy rounds. */
CT_API void ct_classify_config_default(ct_classify_config* cfg);
CT_API ct_status ct_classify_run(const ct_classify_config* cfg, ct_classify_result** out);
CT_API void ct_classify_free(ct_classify_result* r);
CT_API void ct_classify_get_summary(const ct_classify_result* r, ct_classify_summary* out);
/* "round,sensor,test_error" */
CT_API ct_status ct_classify_trace_csv(const ct_classify_result* r, char** csv);
/* "sensor,test_error_before,test_error_after" */
CT_API ct_status ct_classify_histogram_csv(const ct_classify_result* r, char** csv);

/* ---- small-instance oracle checks -------------------------------------- */

typedef struct ct_oracle_config {
  size_t sensors;            /* <= 4 */
  size_t particles;          /* <= 3 */
  size_t instances;          /* greedy / brute-force instances */
  size_t gibbs_instances;
  size_t gibbs_steps;
  size_t discrete_instances; /* two-state tree instances */
  uint64_t seed;
} ct_oracle_config;

typedef struct ct_oracle_report ct_oracle_report;

#define CT_ORACLE_MAX_SENSORS 4
#define CT_ORACLE_MAX_PARTICLES 3

CT_API void ct_oracle_config_default(ct_oracle_config* cfg);
CT_API ct_status ct_oracle_run(const ct_oracle_config* cfg, ct_oracle_report** out);
CT_API void ct_oracle_free(ct_oracle_report* r);
CT_API size_t ct_oracle_num_checks(const ct_oracle_report* r);
/* name and detail stay valid until the report is freed. */
CT_API ct_status ct_oracle_check(const ct_oracle_report* r, size_t i, const char** name,
                                 int* passed, const char** detail);

/* ---- categorical data --------------------------------------------------- */

typedef struct ct_dataset ct_dataset;

CT_API ct_status ct_dataset_load(const char* path, ct_dataset** out);
CT_API void ct_dataset_free(ct_dataset* ds);
CT_API size_t ct_dataset_rows(const ct_dataset* ds);
CT_API size_t ct_dataset_features(const ct_dataset* ds);
/* Splits like the classify experiment and writes shard_<k>.csv plus test.csv
 * into out_dir, in the loaded file's symbols. */
CT_API ct_status ct_dataset_write_shards(const ct_dataset* ds, size_t train_count,
                                         size_t test_count, size_t num_shards, uint64_t seed,
                                         const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* COLLTRAIN_H */
