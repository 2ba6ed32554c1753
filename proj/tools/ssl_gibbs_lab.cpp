// ssl-gibbs-lab: runs the named experiments and writes CSV/SVG sweeps.
//
//   ssl-gibbs-lab <experiment> [--config FILE] [--seed N] [--out DIR]
//                 [--set key=value]...
//
// Exit codes: 0 success, 1 runtime failure or failed verification,
// 2 config error. Failures emit a one-line JSON record on stderr.

#include <CLI11.hpp>
#include <iostream>
#include <json.hpp>

#include "gibbslab/config.hpp"
#include "gibbslab/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"numerical lab for pseudo-labeling Gibbs generalization error"};
  app.name("ssl-gibbs-lab");

  std::string experiment;
  std::string config_path;
  std::vector<std::string> overrides;
  std::string seed_override;
  std::string out_override;

  std::string experiments_help;
  for (const auto& name : gibbslab::experiment_names())
    experiments_help += (experiments_help.empty() ? "" : ", ") + name;
  app.add_option("experiment", experiment, "one of: " + experiments_help)
      ->required();
  app.add_option("--config", config_path, "INI-style config file");
  app.add_option("--seed", seed_override, "seed override");
  app.add_option("--out", out_override, "output directory override");
  app.add_option("--set", overrides, "key=value override, repeatable");

  CLI11_PARSE(app, argc, argv);

  auto emit_error = [&](int code, const std::string& message) {
    nlohmann::json record = {{"error", message},
                             {"experiment", experiment},
                             {"exit", code}};
    std::cerr << record.dump() << "\n";
    return code;
  };

  try {
    if (!seed_override.empty()) overrides.push_back("seed=" + seed_override);
    if (!out_override.empty()) overrides.push_back("out=" + out_override);
    gibbslab::ExperimentConfig cfg =
        gibbslab::load_config(experiment, config_path, overrides);
    int status = gibbslab::run_experiment(cfg, std::cout);
    if (status != 0) return emit_error(status, "experiment reported failures");
    return 0;
  } catch (const gibbslab::ConfigError& e) {
    return emit_error(2, e.what());
  } catch (const std::invalid_argument& e) {
    return emit_error(2, e.what());
  } catch (const std::exception& e) {
    return emit_error(1, e.what());
  }
}
