#pragma once

#include <iosfwd>
#include <string>

#include "gibbslab/config.hpp"
#include "gibbslab/sweep.hpp"

namespace gibbslab {

// Runs one named experiment: writes <out>/<experiment>.csv and .svg, prints
// one summary line per sweep point to `log`. Returns 0 on success, 1 when a
// verification experiment finds a violation or a cell is invalid. Throws
// ConfigError (exit 2 at the CLI) for parameter problems.
int run_experiment(const ExperimentConfig& cfg, std::ostream& log);

// Threshold of minimum cross-covariance; ties break toward the smaller T.
double select_threshold(const SweepResult& sweep);

}  // namespace gibbslab
