#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"

#include "colltrain/colltrain.h"

namespace {

std::string take(char* s) {
  std::string out(s ? s : "");
  ct_string_free(s);
  return out;
}

}  // namespace

TEST_CASE("status names and errors") {
  CHECK(std::string(ct_status_name(CT_OK)) == "ok");
  CHECK(std::string(ct_status_name(CT_LOOPY_GRAPH)) == "loopy graph");
  CHECK(std::strlen(ct_version()) > 0);
  ct_topology* t = nullptr;
  CHECK(ct_topology_random_expected_degree(5, 9.0, 1, &t) == CT_INVALID_ARGUMENT);
  CHECK(t == nullptr);
  CHECK(std::string(ct_last_error()).size() > 0);
  CHECK(ct_topology_random_geometric(5, 0.2, 1, nullptr) == CT_INVALID_ARGUMENT);
}

TEST_CASE("topology handles") {
  const uint32_t ends[] = {0, 1, 2, 1, 3, 2};
  ct_topology* t = nullptr;
  REQUIRE(ct_topology_from_edges(4, ends, 3, &t) == CT_OK);
  CHECK(ct_topology_num_sensors(t) == 4);
  CHECK(ct_topology_num_edges(t) == 3);
  uint32_t a = 9, b = 9;
  CHECK(ct_topology_edge(t, 1, &a, &b) == CT_OK);
  CHECK(a == 1);
  CHECK(b == 2);
  CHECK(ct_topology_edge(t, 3, &a, &b) == CT_OUT_OF_RANGE);
  uint32_t nb[1];
  size_t count = 0;
  CHECK(ct_topology_neighbors(t, 1, nb, 1, &count) == CT_OK);
  CHECK(count == 2);
  CHECK(nb[0] == 0);
  CHECK(ct_topology_neighbors(t, 4, nb, 1, &count) == CT_OUT_OF_RANGE);
  int tree = 0;
  CHECK(ct_topology_is_tree(t, &tree) == CT_OK);
  CHECK(tree == 1);
  char* text = nullptr;
  REQUIRE(ct_topology_edge_list(t, &text) == CT_OK);
  const std::string list = take(text);
  ct_topology* back = nullptr;
  REQUIRE(ct_topology_parse_edge_list(list.c_str(), &back) == CT_OK);
  CHECK(ct_topology_num_edges(back) == 3);
  ct_topology_free(back);
  ct_topology_free(t);
  CHECK(ct_topology_parse_edge_list("m x", &back) != CT_OK);
}

TEST_CASE("gaussian message passing through the C API") {
  const ct_gaussian local{2.0, 1.0};
  const ct_gaussian in[] = {{0.0, 1.0}};
  ct_gaussian out{};
  CHECK(ct_gaussian_message_update(&local, in, 1, 0.0, &out) == CT_OK);
  CHECK(out.mean == doctest::Approx(1.0));
  CHECK(out.variance == doctest::Approx(0.5));
  const ct_gaussian nan_in[] = {{NAN, 1.0}};
  CHECK(ct_gaussian_message_update(&local, nan_in, 1, 0.0, &out) == CT_NUMERICAL_FAILURE);

  const ct_gaussian pots[] = {{0.0, 1.0}, {3.0, 0.5}};
  double avg = 0.0;
  CHECK(ct_precision_weighted_average(pots, 2, &avg) == CT_OK);
  CHECK(avg == doctest::Approx(2.0));

  const uint32_t ends[] = {0, 1};
  ct_topology* t = nullptr;
  REQUIRE(ct_topology_from_edges(2, ends, 1, &t) == CT_OK);
  const double lambda[] = {1e-16};
  ct_bp_config cfg;
  ct_bp_config_default(&cfg);
  CHECK(cfg.max_rounds == 1000);
  ct_bp_result* r = nullptr;
  REQUIRE(ct_gaussian_bp(t, pots, lambda, &cfg, &r) == CT_OK);
  ct_gaussian m{};
  CHECK(ct_bp_result_marginal(r, 1, &m) == CT_OK);
  CHECK(m.mean == doctest::Approx(2.0));
  CHECK(ct_bp_result_converged(r) == 1);
  CHECK(ct_bp_result_marginal(r, 2, &m) == CT_OUT_OF_RANGE);
  char* csv = nullptr;
  CHECK(ct_bp_result_trace_csv(r, &csv) == CT_OK);
  CHECK(take(csv).rfind("round,max_message_delta\n", 0) == 0);
  ct_bp_result_free(r);

  const double weights[] = {1.0, 3.0, 1.0, 1.0};
  int decisions[2] = {-1, -1};
  CHECK(ct_discrete_bp_map(t, weights, 0.0, decisions) == CT_OK);
  CHECK(decisions[0] == 1);
  CHECK(decisions[1] == 1);
  ct_topology_free(t);

  const uint32_t tri[] = {0, 1, 1, 2, 0, 2};
  REQUIRE(ct_topology_from_edges(3, tri, 3, &t) == CT_OK);
  const double w3[] = {1, 2, 1, 2, 1, 2};
  int d3[3];
  CHECK(ct_discrete_bp_map(t, w3, 0.0, d3) == CT_LOOPY_GRAPH);
  ct_topology_free(t);
}

TEST_CASE("regression experiment through the C API") {
  ct_regress_config cfg;
  ct_regress_config_default(&cfg);
  CHECK(cfg.num_sensors == 50);
  CHECK(cfg.radius == 0.2);
  ct_regress_result* r = nullptr;
  REQUIRE(ct_regress_run(&cfg, &r) == CT_OK);
  const size_t n = ct_regress_num_rounds(r);
  REQUIRE(n >= 2);
  ct_round_metrics first{}, last{};
  CHECK(ct_regress_round(r, 0, &first) == CT_OK);
  CHECK(ct_regress_round(r, n - 1, &last) == CT_OK);
  CHECK(first.test_error > last.test_error);
  CHECK(ct_regress_round(r, n, &last) == CT_OUT_OF_RANGE);
  CHECK(ct_regress_num_sensors(r) == 50);
  char* csv = nullptr;
  CHECK(ct_regress_rounds_csv(r, &csv) == CT_OK);
  CHECK(take(csv).rfind("round,test_error,estimate_variance\n", 0) == 0);
  CHECK(ct_regress_marginals_csv(r, &csv) == CT_OK);
  CHECK(take(csv).rfind("sensor,mean,variance\n", 0) == 0);
  ct_regress_free(r);

  cfg.radius = -1;
  CHECK(ct_regress_run(&cfg, &r) == CT_INVALID_ARGUMENT);
}

TEST_CASE("classify experiment through the C API") {
  ct_classify_config cfg;
  ct_classify_config_default(&cfg);
  cfg.synthetic_rows = 600;
  cfg.synthetic_features = 8;
  cfg.sensors = 5;
  cfg.degree = 2.0;
  cfg.train_count = 300;
  cfg.rounds = 50;
  ct_classify_result* r = nullptr;
  REQUIRE(ct_classify_run(&cfg, &r) == CT_OK);
  ct_classify_summary s{};
  ct_classify_get_summary(r, &s);
  CHECK(s.dataset_rows == 600);
  CHECK(s.test_rows == 300);
  CHECK(s.sampler_median >= 0.0);
  CHECK(s.sampler_median <= 1.0);
  char* csv = nullptr;
  CHECK(ct_classify_histogram_csv(r, &csv) == CT_OK);
  CHECK(take(csv).rfind("sensor,test_error_before,test_error_after\n", 0) == 0);
  ct_classify_free(r);

  cfg.rounds = 0;
  REQUIRE(ct_classify_run(&cfg, &r) == CT_OK);
  ct_classify_get_summary(r, &s);
  CHECK(s.sampler_median == s.noncollaborative_median);
  ct_classify_free(r);

  cfg.rounds = 100;
  cfg.sensors = 1;
  cfg.degree = 0.0;
  REQUIRE(ct_classify_run(&cfg, &r) == CT_OK);
  ct_classify_get_summary(r, &s);
  CHECK(s.sampler_median == s.noncollaborative_median);
  ct_classify_free(r);

  cfg.dataset_path = "/nonexistent/kr-vs-kp.data";
  CHECK(ct_classify_run(&cfg, &r) == CT_IO_ERROR);
}

TEST_CASE("oracle through the C API") {
  ct_oracle_config cfg;
  ct_oracle_config_default(&cfg);
  cfg.instances = 5;
  cfg.gibbs_instances = 0;
  cfg.discrete_instances = 20;
  ct_oracle_report* r = nullptr;
  REQUIRE(ct_oracle_run(&cfg, &r) == CT_OK);
  REQUIRE(ct_oracle_num_checks(r) == 4);
  for (size_t i = 1; i < 4; ++i) {
    const char* name = nullptr;
    const char* detail = nullptr;
    int passed = 0;
    CHECK(ct_oracle_check(r, i, &name, &passed, &detail) == CT_OK);
    INFO(name << ": " << detail);
    CHECK(passed == 1);
  }
  ct_oracle_free(r);
  cfg.sensors = 10;
  CHECK(ct_oracle_run(&cfg, &r) == CT_INVALID_ARGUMENT);
  cfg.sensors = 2;
  cfg.particles = 4;
  CHECK(ct_oracle_run(&cfg, &r) == CT_INVALID_ARGUMENT);
}

TEST_CASE("datasets through the C API") {
  const auto dir = std::filesystem::temp_directory_path() / "colltrain_capi_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "d.csv";
  {
    std::ofstream out(path);
    for (int i = 0; i < 30; ++i) out << (i % 3 ? "a" : "b") << ',' << (i % 2 ? "x" : "y") << ',' << (i % 5 ? "won" : "nowin") << '\n';
  }
  ct_dataset* ds = nullptr;
  REQUIRE(ct_dataset_load(path.c_str(), &ds) == CT_OK);
  CHECK(ct_dataset_rows(ds) == 30);
  CHECK(ct_dataset_features(ds) == 2);
  const auto out_dir = dir / "shards";
  CHECK(ct_dataset_write_shards(ds, 20, 10, 4, 3, out_dir.c_str()) == CT_OK);
  CHECK(std::filesystem::exists(out_dir / "shard_3.csv"));
  CHECK(std::filesystem::exists(out_dir / "test.csv"));
  CHECK(ct_dataset_write_shards(ds, 21, 9, 4, 3, out_dir.c_str()) == CT_INVALID_ARGUMENT);
  ct_dataset_free(ds);
  CHECK(ct_dataset_load((dir / "missing.csv").c_str(), &ds) == CT_IO_ERROR);
  {
    std::ofstream out(dir / "ragged.csv");
    out << "a,b,won\na,won\n";
  }
  CHECK(ct_dataset_load((dir / "ragged.csv").c_str(), &ds) == CT_DATA_ERROR);
  CHECK(std::string(ct_last_error()).find("line 2") != std::string::npos);
}
