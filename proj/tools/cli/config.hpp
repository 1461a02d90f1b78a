#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "cfstat/cfmaps.hpp"
#include "cfstat/targets.hpp"

namespace cfstat::cli {

enum class Centre { spectral, empirical };

struct ExperimentConfig {
  std::string algorithm = "gauss";
  std::optional<double> Q;
  std::optional<std::int64_t> denominator_bound;
  std::optional<std::string> targets;  // unset: the digit 1 (JP: 0:1)
  int grid = 0;                        // 0: operator default
  std::int64_t jmax = 0;               // 0: operator default
  std::vector<double> epsilon;         // empty: 0.5 * Lambda_j per target
  std::vector<double> q_grid;
  int threads = 1;
  std::string out = ".";
  Centre centre = Centre::spectral;
  std::uint64_t budget = 400'000'000ULL;
  int bins = 101;
  std::vector<std::string> criteria;
  bool inject_fault = false;

  MapDescriptor map() const;
  TargetSet target_set() const;
  /// Q, or (m+1) log N when a denominator bound is given.
  double weight_bound() const;
  nlohmann::json to_json() const;
};

/// Reads the keys of ExperimentConfig from a JSON object (unknown keys are rejected).
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

/// Throws ValidationError. `needs_bound`: the command enumerates.
void validate(const ExperimentConfig& c, bool needs_bound);

}  // namespace cfstat::cli
