// colltrain: command-line driver for the regression consensus experiment,
// the decision-tree particle experiment and the small-instance oracle checks.
//
// Every run resolves its flags into a JSON config, writes it to
// <out-dir>/manifest.json together with the artifact list, and runs from
// that config alone. `colltrain replay manifest.json` therefore reproduces
// the CSVs byte for byte.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "colltrain/colltrain.h"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct Failure {
  int exit_code;
  std::string message;
};

int exit_code_for(ct_status st) {
  switch (st) {
    case CT_INVALID_ARGUMENT:
    case CT_OUT_OF_RANGE:
    case CT_DATA_ERROR:
    case CT_IO_ERROR:
      return kExitUsage;
    default:
      return kExitFailure;
  }
}

void check(ct_status st, const char* what) {
  if (st != CT_OK) {
    throw Failure{exit_code_for(st),
                  std::string(what) + ": " + ct_status_name(st) + ": " + ct_last_error()};
  }
}

// Owns a malloc'd string returned by the library.
std::string take(char* s) {
  std::string out(s ? s : "");
  ct_string_free(s);
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Failure{kExitFailure, "cannot write " + path.string()};
}

const char* schedule_name(ct_schedule s) {
  return s == CT_SCHEDULE_SEQUENTIAL ? "sequential" : "synchronous";
}

ct_schedule parse_schedule(const std::string& s) {
  return s == "sequential" ? CT_SCHEDULE_SEQUENTIAL : CT_SCHEDULE_SYNCHRONOUS;
}

// ---- regress

json regress_config_json(const ct_regress_config& c) {
  return json{{"sensors", c.num_sensors},
              {"radius", c.radius},
              {"slope", c.true_slope},
              {"sigma", c.noise_scale},
              {"bootstrap", c.bootstrap_reps},
              {"epsilon", c.lambda_sq},
              {"seed", c.seed},
              {"test_grid", c.test_grid_size},
              {"max_rounds", c.bp.max_rounds},
              {"tol", c.bp.convergence_tol},
              {"schedule", schedule_name(c.bp.schedule)},
              {"initial_message", {c.bp.initial_message.mean, c.bp.initial_message.variance}}};
}

ct_regress_config regress_config_from(const json& j) {
  ct_regress_config c;
  ct_regress_config_default(&c);
  c.num_sensors = j.at("sensors").get<size_t>();
  c.radius = j.at("radius").get<double>();
  c.true_slope = j.at("slope").get<double>();
  c.noise_scale = j.at("sigma").get<double>();
  c.bootstrap_reps = j.at("bootstrap").get<size_t>();
  c.lambda_sq = j.at("epsilon").get<double>();
  c.seed = j.at("seed").get<uint64_t>();
  c.test_grid_size = j.at("test_grid").get<size_t>();
  c.bp.max_rounds = j.at("max_rounds").get<size_t>();
  c.bp.convergence_tol = j.at("tol").get<double>();
  c.bp.schedule = parse_schedule(j.at("schedule").get<std::string>());
  c.bp.initial_message.mean = j.at("initial_message").at(0).get<double>();
  c.bp.initial_message.variance = j.at("initial_message").at(1).get<double>();
  return c;
}

std::vector<std::string> run_regress(const json& cfg, const fs::path& out_dir) {
  const ct_regress_config c = regress_config_from(cfg);
  ct_regress_result* r = nullptr;
  check(ct_regress_run(&c, &r), "regress");
  std::unique_ptr<ct_regress_result, decltype(&ct_regress_free)> guard(r, ct_regress_free);

  char* s = nullptr;
  check(ct_regress_rounds_csv(r, &s), "rounds.csv");
  write_text(out_dir / "rounds.csv", take(s));
  check(ct_regress_marginals_csv(r, &s), "marginals.csv");
  write_text(out_dir / "marginals.csv", take(s));
  check(ct_regress_bp_trace_csv(r, &s), "bp_trace.csv");
  write_text(out_dir / "bp_trace.csv", take(s));

  const size_t n = ct_regress_num_rounds(r);
  ct_round_metrics first{}, last{};
  check(ct_regress_round(r, 0, &first), "round 0");
  check(ct_regress_round(r, n - 1, &last), "last round");
  double central_slope = 0.0, central_err = 0.0;
  ct_regress_centralized(r, &central_slope, &central_err);

  std::printf("sensors %zu, BP rounds %zu (%s), unidentifiable sensors %zu\n",
              ct_regress_num_sensors(r), n - 1, ct_regress_converged(r) ? "converged" : "not converged",
              ct_regress_num_unidentifiable(r));
  std::printf("round %zu: test error %.6g, estimate variance %.6g\n", first.round,
              first.test_error, first.estimate_variance);
  std::printf("final test error %.6g\nfinal estimate variance %.6g\n", last.test_error,
              last.estimate_variance);
  std::printf("centralized slope %.6g, test error %.6g\n", central_slope, central_err);
  return {"rounds.csv", "marginals.csv", "bp_trace.csv"};
}

// ---- classify

json classify_config_json(const ct_classify_config& c, const std::string& dataset) {
  return json{{"dataset", dataset},
              {"synthetic_rows", c.synthetic_rows},
              {"synthetic_features", c.synthetic_features},
              {"synthetic_arity", c.synthetic_arity},
              {"synthetic_rule_depth", c.synthetic_rule_depth},
              {"synthetic_noise", c.synthetic_noise},
              {"sensors", c.sensors},
              {"degree", c.degree},
              {"particles", c.particles},
              {"train", c.train_count},
              {"test", c.test_count},
              {"max_depth", c.max_depth},
              {"min_leaf", c.min_leaf},
              {"kernel_exponent", c.kernel_exponent},
              {"similarity_power", c.similarity_power},
              {"rounds", c.rounds},
              {"mode", c.mode == CT_MODE_GIBBS ? "gibbs" : "greedy"},
              {"order", c.order == CT_ORDER_FIXED_PERMUTATION ? "fixed" : "random"},
              {"trace_interval", c.trace_interval},
              {"seed", c.seed}};
}

std::vector<std::string> run_classify(const json& cfg, const fs::path& out_dir) {
  ct_classify_config c;
  ct_classify_config_default(&c);
  const std::string dataset = cfg.at("dataset").get<std::string>();
  c.dataset_path = dataset.c_str();
  c.synthetic_rows = cfg.at("synthetic_rows").get<size_t>();
  c.synthetic_features = cfg.at("synthetic_features").get<size_t>();
  c.synthetic_arity = cfg.at("synthetic_arity").get<uint16_t>();
  c.synthetic_rule_depth = cfg.at("synthetic_rule_depth").get<size_t>();
  c.synthetic_noise = cfg.at("synthetic_noise").get<double>();
  c.sensors = cfg.at("sensors").get<size_t>();
  c.degree = cfg.at("degree").get<double>();
  c.particles = cfg.at("particles").get<size_t>();
  c.train_count = cfg.at("train").get<size_t>();
  c.test_count = cfg.at("test").get<size_t>();
  c.max_depth = cfg.at("max_depth").get<size_t>();
  c.min_leaf = cfg.at("min_leaf").get<size_t>();
  c.kernel_exponent = cfg.at("kernel_exponent").get<int>();
  c.similarity_power = cfg.at("similarity_power").get<int>();
  c.rounds = cfg.at("rounds").get<size_t>();
  c.mode = cfg.at("mode").get<std::string>() == "gibbs" ? CT_MODE_GIBBS : CT_MODE_GREEDY;
  c.order = cfg.at("order").get<std::string>() == "fixed" ? CT_ORDER_FIXED_PERMUTATION
                                                          : CT_ORDER_RANDOM;
  c.trace_interval = cfg.at("trace_interval").get<size_t>();
  c.seed = cfg.at("seed").get<uint64_t>();

  ct_classify_result* r = nullptr;
  check(ct_classify_run(&c, &r), "classify");
  std::unique_ptr<ct_classify_result, decltype(&ct_classify_free)> guard(r, ct_classify_free);

  char* s = nullptr;
  check(ct_classify_trace_csv(r, &s), "trace.csv");
  write_text(out_dir / "trace.csv", take(s));
  check(ct_classify_histogram_csv(r, &s), "histogram.csv");
  write_text(out_dir / "histogram.csv", take(s));

  ct_classify_summary sum{};
  ct_classify_get_summary(r, &sum);
  std::printf("data: %s, %zu rows, %zu features, %zu test rows; %zu sensors, %zu edges\n",
              dataset.empty() ? "synthetic" : dataset.c_str(), sum.dataset_rows,
              sum.num_features, sum.test_rows, c.sensors, sum.topology_edges);
  std::printf("%-34s %s\n", "Method", "Test error");
  std::printf("%-34s %.4f\n", "Centralized decision tree", sum.centralized_tree_error);
  std::printf("%-34s %.4f\n", "Brute-force MAP (local kernels)", sum.map_local_error);
  std::printf("%-34s %.4f\n", "Brute-force MAP (pooled kernels)", sum.map_pooled_error);
  std::printf("%-34s %.4f\n", "Non-collaborative (median)", sum.noncollaborative_median);
  std::printf("%-34s %.4f\n", "Sampling algorithm (median)", sum.sampler_median);
  std::printf("%-34s %.4f\n", "Majority vote", sum.majority_vote_error);
  std::printf("distinct final classifiers: %zu\n", sum.distinct_final_classifiers);
  return {"trace.csv", "histogram.csv"};
}

// ---- oracle

std::vector<std::string> run_oracle(const json& cfg, const fs::path& out_dir) {
  ct_oracle_config c;
  ct_oracle_config_default(&c);
  c.sensors = cfg.at("sensors").get<size_t>();
  c.particles = cfg.at("particles").get<size_t>();
  c.instances = cfg.at("instances").get<size_t>();
  c.gibbs_instances = cfg.at("gibbs_instances").get<size_t>();
  c.gibbs_steps = cfg.at("gibbs_steps").get<size_t>();
  c.discrete_instances = cfg.at("discrete_instances").get<size_t>();
  c.seed = cfg.at("seed").get<uint64_t>();

  ct_oracle_report* r = nullptr;
  check(ct_oracle_run(&c, &r), "oracle");
  std::unique_ptr<ct_oracle_report, decltype(&ct_oracle_free)> guard(r, ct_oracle_free);

  std::string report;
  bool all = true;
  for (size_t i = 0; i < ct_oracle_num_checks(r); ++i) {
    const char* name = nullptr;
    const char* detail = nullptr;
    int passed = 0;
    check(ct_oracle_check(r, i, &name, &passed, &detail), "oracle check");
    all = all && passed;
    report += std::string(passed ? "PASS " : "FAIL ") + name + ": " + detail + "\n";
  }
  std::fputs(report.c_str(), stdout);
  write_text(out_dir / "oracle.txt", report);
  if (!all) throw Failure{kExitFailure, "oracle checks failed"};
  return {"oracle.txt"};
}

// ---- dispatch

std::vector<std::string> run(const std::string& subcommand, const json& cfg,
                             const fs::path& out_dir) {
  fs::create_directories(out_dir);
  if (subcommand == "regress") return run_regress(cfg, out_dir);
  if (subcommand == "classify") return run_classify(cfg, out_dir);
  if (subcommand == "oracle") return run_oracle(cfg, out_dir);
  throw Failure{kExitUsage, "unknown subcommand '" + subcommand + "' in manifest"};
}

void write_manifest(const fs::path& out_dir, const std::string& subcommand, const json& cfg,
                    const std::vector<std::string>& artifacts) {
  json m{{"subcommand", subcommand},
         {"version", ct_version()},
         {"seed", cfg.at("seed")},
         {"config", cfg},
         {"artifacts", artifacts}};
  write_text(out_dir / "manifest.json", m.dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Collaborative training over sensor networks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ct_version());

  std::string out_dir = "out";
  uint64_t seed = 0;
  bool seed_given = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out-dir", out_dir, "Directory for CSVs and manifest.json")
        ->capture_default_str();
    sub->add_option_function<uint64_t>(
        "--seed", [&](const uint64_t& v) { seed = v, seed_given = true; }, "Root seed");
  };

  // regress
  ct_regress_config rc;
  ct_regress_config_default(&rc);
  std::string reg_schedule = "synchronous";
  auto* reg = app.add_subcommand("regress", "Gaussian consensus regression on a geometric graph");
  add_common(reg);
  reg->add_option("--sensors", rc.num_sensors, "Number of sensors")
      ->capture_default_str()->check(CLI::PositiveNumber);
  reg->add_option("--radius", rc.radius, "Communication radius")
      ->capture_default_str()->check(CLI::NonNegativeNumber);
  reg->add_option("--slope", rc.true_slope, "True slope")->capture_default_str();
  reg->add_option("--sigma", rc.noise_scale, "Noise scale")
      ->capture_default_str()->check(CLI::NonNegativeNumber);
  reg->add_option("--bootstrap", rc.bootstrap_reps, "Bootstrap resamples per sensor")
      ->capture_default_str()->check(CLI::Range(2, 1000000));
  reg->add_option("--epsilon", rc.lambda_sq, "Edge smoothness variance")
      ->capture_default_str()->check(CLI::NonNegativeNumber);
  reg->add_option("--test-grid", rc.test_grid_size, "Test grid intervals")
      ->capture_default_str()->check(CLI::PositiveNumber);
  reg->add_option("--max-rounds", rc.bp.max_rounds, "Message-passing round cap")
      ->capture_default_str();
  reg->add_option("--tol", rc.bp.convergence_tol, "Convergence tolerance")
      ->capture_default_str()->check(CLI::NonNegativeNumber);
  reg->add_option("--schedule", reg_schedule, "synchronous | sequential")
      ->capture_default_str()->check(CLI::IsMember({"synchronous", "sequential"}));

  // classify
  ct_classify_config cc;
  ct_classify_config_default(&cc);
  std::string dataset;
  bool synthetic = false;
  std::string cls_mode = "greedy", cls_order = "random";
  auto* cls = app.add_subcommand("classify", "Decision-tree particle sampler");
  add_common(cls);
  cls->add_option("dataset", dataset, "Categorical CSV, class label in the last column");
  cls->add_flag("--synthetic", synthetic, "Use generated categorical data instead of a file");
  cls->add_option("--synthetic-rows", cc.synthetic_rows)->capture_default_str()->check(CLI::PositiveNumber);
  cls->add_option("--synthetic-features", cc.synthetic_features)->capture_default_str()->check(CLI::PositiveNumber);
  cls->add_option("--synthetic-arity", cc.synthetic_arity)->capture_default_str()->check(CLI::Range(2, 64));
  cls->add_option("--synthetic-depth", cc.synthetic_rule_depth)->capture_default_str();
  cls->add_option("--synthetic-noise", cc.synthetic_noise)->capture_default_str()->check(CLI::Range(0.0, 0.5));
  cls->add_option("--sensors", cc.sensors)->capture_default_str()->check(CLI::PositiveNumber);
  cls->add_option("--degree", cc.degree)->capture_default_str()->check(CLI::NonNegativeNumber);
  cls->add_option("--particles", cc.particles)->capture_default_str()->check(CLI::PositiveNumber);
  cls->add_option("--train", cc.train_count)->capture_default_str()->check(CLI::PositiveNumber);
  cls->add_option("--test", cc.test_count, "Test rows (0: all remaining)")->capture_default_str();
  cls->add_option("--max-depth", cc.max_depth)->capture_default_str();
  cls->add_option("--min-leaf", cc.min_leaf)->capture_default_str()->check(CLI::PositiveNumber);
  cls->add_option("--kernel-exponent", cc.kernel_exponent)->capture_default_str()->check(CLI::PositiveNumber);
  cls->add_option("--similarity-power", cc.similarity_power)->capture_default_str()->check(CLI::PositiveNumber);
  cls->add_option("--rounds", cc.rounds, "Single-site updates")->capture_default_str();
  cls->add_option("--mode", cls_mode, "greedy | gibbs")
      ->capture_default_str()->check(CLI::IsMember({"greedy", "gibbs"}));
  cls->add_option("--order", cls_order, "random | fixed")
      ->capture_default_str()->check(CLI::IsMember({"random", "fixed"}));
  cls->add_option("--trace-interval", cc.trace_interval)->capture_default_str()->check(CLI::PositiveNumber);

  // oracle
  ct_oracle_config oc;
  ct_oracle_config_default(&oc);
  size_t seeds = 0;
  auto* orc = app.add_subcommand("oracle", "Small-instance checks against exhaustive enumeration");
  add_common(orc);
  orc->add_option("--sensors", oc.sensors)->capture_default_str()
      ->check(CLI::Range(size_t{1}, size_t{CT_ORACLE_MAX_SENSORS}));
  orc->add_option("--particles", oc.particles)->capture_default_str()
      ->check(CLI::Range(size_t{1}, size_t{CT_ORACLE_MAX_PARTICLES}));
  orc->add_option("--instances", oc.instances, "Greedy and brute-force instances")->capture_default_str();
  orc->add_option("--gibbs-instances", oc.gibbs_instances)->capture_default_str();
  orc->add_option("--gibbs-steps", oc.gibbs_steps)->capture_default_str();
  orc->add_option("--seeds", seeds, "Discrete message-passing tree instances")
      ->default_val(oc.discrete_instances);

  // replay
  std::string manifest_path;
  auto* rep = app.add_subcommand("replay", "Re-run the configuration stored in a manifest");
  rep->add_option("manifest", manifest_path, "manifest.json written by an earlier run")->required();
  rep->add_option("--out-dir", out_dir, "Output directory (default: the manifest's directory)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    std::string subcommand;
    json cfg;
    if (*reg) {
      if (seed_given) rc.seed = seed;
      rc.bp.schedule = parse_schedule(reg_schedule);
      subcommand = "regress";
      cfg = regress_config_json(rc);
    } else if (*cls) {
      if (dataset.empty() && !synthetic) {
        std::cerr << "classify: give a dataset path or --synthetic\n" << cls->help();
        return kExitUsage;
      }
      if (!dataset.empty() && synthetic) {
        std::cerr << "classify: a dataset path and --synthetic are mutually exclusive\n";
        return kExitUsage;
      }
      if (!dataset.empty() && !fs::exists(dataset)) {
        std::cerr << "classify: dataset '" << dataset << "' not found\n";
        return kExitUsage;
      }
      cc.seed = seed;
      cc.mode = cls_mode == "gibbs" ? CT_MODE_GIBBS : CT_MODE_GREEDY;
      cc.order = cls_order == "fixed" ? CT_ORDER_FIXED_PERMUTATION : CT_ORDER_RANDOM;
      subcommand = "classify";
      cfg = classify_config_json(cc, dataset);
    } else if (*orc) {
      oc.discrete_instances = seeds;
      oc.seed = seed;
      subcommand = "oracle";
      cfg = json{{"sensors", oc.sensors},
                 {"particles", oc.particles},
                 {"instances", oc.instances},
                 {"gibbs_instances", oc.gibbs_instances},
                 {"gibbs_steps", oc.gibbs_steps},
                 {"discrete_instances", oc.discrete_instances},
                 {"seed", oc.seed}};
    } else {
      std::ifstream in(manifest_path);
      if (!in) {
        std::cerr << "replay: cannot open '" << manifest_path << "'\n";
        return kExitUsage;
      }
      json manifest;
      try {
        manifest = json::parse(in);
        subcommand = manifest.at("subcommand").get<std::string>();
        cfg = manifest.at("config");
      } catch (const json::exception& e) {
        std::cerr << "replay: malformed manifest: " << e.what() << "\n";
        return kExitUsage;
      }
      if (!rep->count("--out-dir")) out_dir = fs::path(manifest_path).parent_path().string();
      if (out_dir.empty()) out_dir = ".";
    }

    const fs::path dir(out_dir);
    std::vector<std::string> artifacts;
    try {
      artifacts = run(subcommand, cfg, dir);
    } catch (const json::exception& e) {
      throw Failure{kExitUsage, std::string("bad config: ") + e.what()};
    } catch (const Failure& f) {
      // A failed oracle still leaves a manifest behind for replay.
      if (subcommand == "oracle" && f.exit_code == kExitFailure && fs::exists(dir / "oracle.txt")) {
        write_manifest(dir, subcommand, cfg, {"oracle.txt"});
      }
      throw;
    }
    artifacts.push_back("manifest.json");
    write_manifest(dir, subcommand, cfg, artifacts);
    std::printf("wrote %s\n", (dir / "manifest.json").string().c_str());
    return 0;
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << "\n";
    return f.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}
