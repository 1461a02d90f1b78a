#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace cfstat {

/// Invalid argument or configuration; maps to CLI exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A forward map was applied to its terminal state (e.g. the Gauss map at 0).
class Terminated : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A point lies outside the domain of an inverse branch.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Exact integer arithmetic would overflow the chosen integer type.
class ArithmeticOverflow : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

/// Requested enumeration is larger than the configured resource budget.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A branch image escaped the Markov cell declared in the branch table.
class MarkovViolation : public std::runtime_error {
 public:
  explicit MarkovViolation(const std::string& trace)
      : std::runtime_error("Markov violation: " + trace), trace_(trace) {}
  const std::string& trace() const noexcept { return trace_; }

 private:
  std::string trace_;
};

/// Power iteration did not settle within the iteration cap.
class ConvergenceFailure : public std::runtime_error {
 public:
  ConvergenceFailure(const std::string& what, std::vector<double> ratio_trace)
      : std::runtime_error(what), ratio_trace_(std::move(ratio_trace)) {}
  const std::vector<double>& ratio_trace() const noexcept { return ratio_trace_; }

 private:
  std::vector<double> ratio_trace_;
};

}  // namespace cfstat
