#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gibbslab/harness.hpp"
#include "gibbslab/svg.hpp"

using namespace gibbslab;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::path("harness_test_tmp") / std::to_string(counter()++);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all("harness_test_tmp"); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig tiny_config(const std::string& experiment,
                             const std::string& out,
                             std::vector<std::string> extra = {}) {
  extra.push_back("out=" + out);
  extra.push_back("seed=12345");
  return load_config(experiment, "", extra);
}

}  // namespace

TEST_CASE("config: strict keys, sections, overrides") {
  CHECK_THROWS_AS(load_config("no-such-experiment", "", {}), ConfigError);

  ExperimentConfig cfg = load_config("mean-gen-sweep", "", {"seed=7", "n=9"});
  CHECK(cfg.seed == 7);
  CHECK(cfg.params.get_long("n", 0) == 9);

  CHECK_THROWS_AS(load_config("mean-gen-sweep", "", {"bogus"}), ConfigError);

  std::ofstream ini("harness_cfg_tmp.ini");
  ini << "# global\nseed = 99\n[mean-gen-sweep]\nn = 11\n"
         "[crosscov-threshold-sweep]\nn = 22\n";
  ini.close();
  ExperimentConfig from_file = load_config("mean-gen-sweep", "harness_cfg_tmp.ini", {});
  CHECK(from_file.seed == 99);
  CHECK(from_file.params.get_long("n", 0) == 11);
  ExperimentConfig other = load_config("crosscov-threshold-sweep",
                                       "harness_cfg_tmp.ini", {"seed=5"});
  CHECK(other.seed == 5);
  CHECK(other.params.get_long("n", 0) == 22);

  std::ofstream bad("harness_cfg_bad.ini");
  bad << "[not-an-experiment]\nx = 1\n";
  bad.close();
  CHECK_THROWS_AS(load_config("mean-gen-sweep", "harness_cfg_bad.ini", {}),
                  ConfigError);
  std::remove("harness_cfg_tmp.ini");
  std::remove("harness_cfg_bad.ini");
}

TEST_CASE("unknown keys are rejected per experiment") {
  TempDir dir;
  ExperimentConfig cfg =
      tiny_config("verify-theorem1", dir.path.string(), {"trials=10"});
  std::ostringstream log;
  // 'trials' is not a verify-theorem1 key ('draws' is)
  CHECK_THROWS_AS(run_experiment(cfg, log), ConfigError);
}

TEST_CASE("select_threshold picks the minimum, ties to smaller T") {
  SweepResult monotone;
  for (int t = 0; t <= 5; ++t)
    monotone.add(t, "cross_cov", 1.0 - 0.1 * t, 0.01, 5, 0);
  CHECK(select_threshold(monotone) == 5.0);

  SweepResult tied;
  tied.add(0, "cross_cov", 0.5, 0.01, 5, 0);
  tied.add(1, "cross_cov", 0.2, 0.01, 5, 0);
  tied.add(2, "cross_cov", 0.2, 0.01, 5, 0);
  tied.add(3, "cross_cov", 0.4, 0.01, 5, 0);
  CHECK(select_threshold(tied) == 1.0);

  SweepResult empty;
  empty.add(0, "other", 1.0, std::nullopt, 5, 0);
  CHECK_THROWS_AS(select_threshold(empty), std::invalid_argument);
}

TEST_CASE("mean-gen-sweep writes deterministic, sorted artifacts") {
  TempDir dir;
  auto opts = std::vector<std::string>{"trials=8192", "en_samples=8192",
                                       "lambda_grid=0,1,10"};
  ExperimentConfig cfg = tiny_config("mean-gen-sweep", (dir.path / "a").string(), opts);
  std::ostringstream log;
  CHECK(run_experiment(cfg, log) == 0);
  fs::path csv = dir.path / "a" / "mean-gen-sweep.csv";
  fs::path svg = dir.path / "a" / "mean-gen-sweep.svg";
  REQUIRE(fs::exists(csv));
  REQUIRE(fs::exists(svg));

  ExperimentConfig cfg2 = tiny_config("mean-gen-sweep", (dir.path / "b").string(), opts);
  std::ostringstream log2;
  CHECK(run_experiment(cfg2, log2) == 0);
  CHECK(slurp(csv) == slurp(dir.path / "b" / "mean-gen-sweep.csv"));

  SweepResult parsed = read_csv_file(csv.string());
  REQUIRE(!parsed.rows.empty());
  double prev = -1.0;
  for (const auto& row : parsed.rows) {
    CHECK(row.sweep_variable >= prev);
    prev = row.sweep_variable;
  }
  // every Monte-Carlo quantity carries a std-err
  for (const auto& row : parsed.rows)
    if (row.quantity == "gen_ssl" && row.m > 0) CHECK(row.std_err.has_value());
  // exact quantities do not, and 2 sigma^2 d / n = 0.8 at every row here
  int sl_rows = 0;
  for (const auto& row : parsed.rows)
    if (row.quantity == "gen_sl_n") {
      CHECK(!row.std_err.has_value());
      CHECK(row.value == 0.8);
      ++sl_rows;
    }
  CHECK(sl_rows == 3);
}

TEST_CASE("svg is a pure function of the csv") {
  TempDir dir;
  ExperimentConfig cfg = tiny_config(
      "crosscov-threshold-sweep", dir.path.string(),
      {"trials=4096", "t_grid=0,2,4"});
  std::ostringstream log;
  CHECK(run_experiment(cfg, log) == 0);
  fs::path csv = dir.path / "crosscov-threshold-sweep.csv";
  fs::path svg = dir.path / "crosscov-threshold-sweep.svg";
  SweepResult parsed = read_csv_file(csv.string());
  std::string regenerated = render_svg(
      parsed, {"cross-covariance vs confidence threshold", "threshold T",
               "trace of cross-covariance", false});
  CHECK(regenerated == slurp(svg));
}

TEST_CASE("verify-theorem1 exits clean") {
  TempDir dir;
  ExperimentConfig cfg = tiny_config("verify-theorem1", dir.path.string(),
                                     {"draws=100"});
  std::ostringstream log;
  CHECK(run_experiment(cfg, log) == 0);
}

TEST_CASE("threshold sweep selects a usable threshold at toy scale") {
  TempDir dir;
  ExperimentConfig cfg = tiny_config(
      "crosscov-threshold-sweep", dir.path.string(),
      {"trials=16384", "t_grid=0,1,2,3"});
  std::ostringstream log;
  CHECK(run_experiment(cfg, log) == 0);
  CHECK(log.str().find("selected threshold") != std::string::npos);
}

TEST_CASE("sgld-check passes its own moment gates") {
  TempDir dir;
  ExperimentConfig cfg = tiny_config("sgld-check", dir.path.string(),
                                     {"iterations=100000", "burn_in=5000"});
  std::ostringstream log;
  CHECK(run_experiment(cfg, log) == 0);
  REQUIRE(fs::exists(dir.path / "sgld-check.csv"));
}

TEST_CASE("verify-oracles passes at reduced trials") {
  TempDir dir;
  ExperimentConfig cfg = tiny_config("verify-oracles", dir.path.string(),
                                     {"trials=30000"});
  std::ostringstream log;
  CHECK(run_experiment(cfg, log) == 0);
}

TEST_CASE("logistic-empirical runs end to end at toy scale") {
  TempDir dir;
  ExperimentConfig cfg = tiny_config(
      "logistic-empirical", dir.path.string(),
      {"n=150", "repetitions=3", "test_size=2000", "lambda_grid=0,1"});
  std::ostringstream log;
  CHECK(run_experiment(cfg, log) == 0);
  SweepResult parsed = read_csv_file((dir.path / "logistic-empirical.csv").string());
  REQUIRE(parsed.rows.size() == 2);
  for (const auto& row : parsed.rows) CHECK(row.std_err.has_value());
}

TEST_CASE("logistic-excess-risk runs end to end at toy scale") {
  TempDir dir;
  ExperimentConfig cfg = tiny_config(
      "logistic-excess-risk", dir.path.string(),
      {"quadrature_size=40000", "lambda_grid=0,1,10", "n=1000"});
  std::ostringstream log;
  CHECK(run_experiment(cfg, log) == 0);
  SweepResult parsed = read_csv_file((dir.path / "logistic-excess-risk.csv").string());
  auto bias = parsed.rows_for("excess_bias");
  REQUIRE(bias.size() == 3);
  CHECK(bias[0]->value <= 1e-14);
  CHECK(bias[2]->value >= bias[1]->value);
}

TEST_CASE("shipped config parses for every experiment it covers") {
  for (const auto& name : experiment_names()) {
    ExperimentConfig cfg =
        load_config(name, SOURCE_DIR "/configs/experiments.ini", {});
    CHECK(cfg.seed == 20260810);
  }
}

TEST_CASE("logistic-theory-sweep produces a monotone curve at toy scale") {
  TempDir dir;
  ExperimentConfig cfg = tiny_config(
      "logistic-theory-sweep", dir.path.string(),
      {"quadrature_size=40000", "lambda_grid=0,1,10"});
  std::ostringstream log;
  CHECK(run_experiment(cfg, log) == 0);
  SweepResult parsed = read_csv_file((dir.path / "logistic-theory-sweep.csv").string());
  auto rows = parsed.rows_for("n_times_gen");
  REQUIRE(rows.size() == 3);
  CHECK(rows[0]->value > rows[1]->value);
  CHECK(rows[1]->value > rows[2]->value);
}
