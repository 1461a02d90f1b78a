#pragma once

#include <functional>
#include <set>
#include <string>
#include <vector>

namespace cfstat::verify {

struct CriterionResult {
  std::string id;
  std::string title;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  int threads = 1;
  /// Corrupt the branch tables before the Markov-consistency check.
  bool inject_fault = false;
  /// Criterion ids to run; empty runs everything.
  std::set<std::string> only;
};

/// Ids in run order: A1..A13 and M (Markov consistency of the branch tables).
std::vector<std::string> criterion_ids();

/// Runs the selected criteria, reporting each result as soon as it is known.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options,
                                            const std::function<void(const CriterionResult&)>& on_result = {});

std::string format_line(const CriterionResult& r);

}  // namespace cfstat::verify
