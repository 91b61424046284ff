#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(COLLTRAIN_CLI) + " " + args + " > cli_test.log 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Header must match exactly; every other field must parse completely as a finite number.
void check_csv(const fs::path& p, const std::string& header) {
  std::ifstream in(p);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == header);
  const auto columns = std::count(header.begin(), header.end(), ',') + 1;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    std::stringstream ss(line);
    std::string field;
    long count = 0;
    while (std::getline(ss, field, ',')) {
      ++count;
      char* end = nullptr;
      const double v = std::strtod(field.c_str(), &end);
      CHECK(end == field.c_str() + field.size());
      CHECK(std::isfinite(v));
    }
    CHECK(count == columns);
  }
  CHECK(rows > 0);
}

}  // namespace

TEST_CASE("regress writes documented CSVs and replays bit-identically") {
  fs::remove_all("regress_a");
  fs::remove_all("regress_b");
  REQUIRE(run("regress --out-dir regress_a --seed 7") == 0);
  check_csv("regress_a/rounds.csv", "round,test_error,estimate_variance");
  check_csv("regress_a/marginals.csv", "sensor,mean,variance");
  check_csv("regress_a/bp_trace.csv", "round,max_message_delta");
  REQUIRE(fs::exists("regress_a/manifest.json"));
  REQUIRE(run("replay regress_a/manifest.json --out-dir regress_b") == 0);
  for (const char* f : {"rounds.csv", "marginals.csv", "bp_trace.csv", "manifest.json"}) {
    CHECK(slurp(fs::path("regress_a") / f) == slurp(fs::path("regress_b") / f));
  }
}

TEST_CASE("regress flags") {
  CHECK(run("regress --radius -1 --out-dir regress_bad") == 2);
  CHECK(run("regress --bogus") == 2);
  REQUIRE(run("regress --sensors 2 --sigma 0 --out-dir regress_quiet") == 0);
  std::ifstream in("regress_quiet/rounds.csv");
  std::string line, last;
  while (std::getline(in, line)) last = line;
  const double variance = std::stod(last.substr(last.rfind(',') + 1));
  CHECK(variance <= 1e-20);
}

TEST_CASE("classify writes documented CSVs and replays bit-identically") {
  fs::remove_all("classify_a");
  fs::remove_all("classify_b");
  REQUIRE(run("classify --synthetic --synthetic-rows 800 --train 400 --sensors 8 --rounds 300 "
              "--seed 3 --out-dir classify_a") == 0);
  check_csv("classify_a/trace.csv", "round,sensor,test_error");
  check_csv("classify_a/histogram.csv", "sensor,test_error_before,test_error_after");
  REQUIRE(run("replay classify_a/manifest.json --out-dir classify_b") == 0);
  for (const char* f : {"trace.csv", "histogram.csv", "manifest.json"}) {
    CHECK(slurp(fs::path("classify_a") / f) == slurp(fs::path("classify_b") / f));
  }
}

TEST_CASE("classify argument errors") {
  CHECK(run("classify --out-dir classify_none") == 2);
  CHECK(run("classify /nonexistent/kr-vs-kp.data --out-dir classify_none") == 2);
  CHECK(run("classify --synthetic --mode sideways") == 2);
}

TEST_CASE("oracle limits and replay") {
  CHECK(run("oracle --sensors 10") == 2);
  CHECK(run("oracle --particles 4") == 2);
  fs::remove_all("oracle_a");
  REQUIRE(run("oracle --instances 5 --gibbs-instances 0 --seeds 100 --out-dir oracle_a") == 0);
  const auto report = slurp("oracle_a/oracle.txt");
  CHECK(report.find("100/100") != std::string::npos);
  REQUIRE(run("replay oracle_a/manifest.json --out-dir oracle_b") == 0);
  CHECK(slurp("oracle_a/oracle.txt") == slurp("oracle_b/oracle.txt"));
  CHECK(run("replay does_not_exist.json") == 2);
}
