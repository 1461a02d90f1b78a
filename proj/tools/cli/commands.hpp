#pragma once

#include <exception>
#include <iosfwd>
#include <string>

#include "config.hpp"

namespace cfstat::cli {

enum ExitCode : int {
  kSuccess = 0,
  kValidationError = 1,
  kCriterionFailure = 2,
  kResourceBudget = 3,
};

/// Exit code for an exception escaping a command.
int exit_code_for(const std::exception& e) noexcept;

// Each command validates the config, writes its files under config.out and
// returns an exit code. `log` receives human-readable progress.
int cmd_enumerate(const ExperimentConfig& c, std::ostream& log);  // trajectories.csv
int cmd_stats(const ExperimentConfig& c, std::ostream& log);      // summary.json
int cmd_clt(const ExperimentConfig& c, std::ostream& log);        // summary.json, histogram.csv
int cmd_ldp(const ExperimentConfig& c, std::ostream& log);        // summary.json
int cmd_spectral(const ExperimentConfig& c, std::ostream& log);   // constants.json, density.csv
int cmd_verify(const ExperimentConfig& c, std::ostream& log);     // report.txt, report.json

int run_command(const std::string& name, const ExperimentConfig& c, std::ostream& log);

}  // namespace cfstat::cli
