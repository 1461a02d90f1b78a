#include <CLI11.hpp>
#include <iostream>
#include <optional>

#include "commands.hpp"
#include "config.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<std::string> algorithm;
  std::optional<double> Q;
  std::optional<std::int64_t> denominator_bound;
  std::optional<std::string> targets;
  std::optional<int> grid;
  std::optional<std::int64_t> jmax;
  std::vector<double> epsilon;
  std::vector<double> q_grid;
  std::optional<int> threads;
  std::optional<std::string> out;
  std::optional<std::string> centre;
  std::optional<std::uint64_t> budget;
  std::optional<int> bins;
  std::vector<std::string> criteria;
  bool inject_fault = false;
};

void add_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON experiment config; flags override its keys");
  cmd->add_option("--algorithm", o.algorithm, "gauss, brun2, brun3 or jp2");
  cmd->add_option("--Q", o.Q, "weight bound Q");
  cmd->add_option("--denominator-bound,-N", o.denominator_bound, "denominator bound N (Q = (m+1) log N)");
  cmd->add_option("--targets", o.targets, "target digits: 1,2 (JP: a:b,a:b)");
  cmd->add_option("--grid", o.grid, "collocation grid points per axis");
  cmd->add_option("--jmax", o.jmax, "branch truncation (Gauss/Brun j, JP b)");
  cmd->add_option("--epsilon", o.epsilon, "LDP deviations")->delimiter(',');
  cmd->add_option("--q-grid", o.q_grid, "weight bounds for CLT/LDP sweeps")->delimiter(',');
  cmd->add_option("--threads", o.threads, "worker threads");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--centre", o.centre, "centring constants: spectral or empirical")
      ->check(CLI::IsMember({"spectral", "empirical"}));
  cmd->add_option("--budget", o.budget, "maximum number of enumeration candidates");
  cmd->add_option("--bins", o.bins, "histogram bins per marginal");
  cmd->add_option("--criteria", o.criteria, "verify: criterion ids to run")->delimiter(',');
  cmd->add_flag("--inject-fault", o.inject_fault, "verify: corrupt the branch tables first");
}

cfstat::cli::ExperimentConfig merge(const Overrides& o) {
  auto c = o.config.empty() ? cfstat::cli::ExperimentConfig{} : cfstat::cli::load_config(o.config);
  if (o.algorithm) c.algorithm = *o.algorithm;
  // A flag for one bound replaces whichever bound the file set.
  if (o.Q) {
    c.Q = o.Q;
    if (!o.denominator_bound) c.denominator_bound.reset();
  }
  if (o.denominator_bound) {
    c.denominator_bound = o.denominator_bound;
    if (!o.Q) c.Q.reset();
  }
  if (o.targets) c.targets = o.targets;
  if (o.grid) c.grid = *o.grid;
  if (o.jmax) c.jmax = *o.jmax;
  if (!o.epsilon.empty()) c.epsilon = o.epsilon;
  if (!o.q_grid.empty()) c.q_grid = o.q_grid;
  if (o.threads) c.threads = *o.threads;
  if (o.out) c.out = *o.out;
  if (o.centre) c.centre = *o.centre == "empirical" ? cfstat::cli::Centre::empirical : cfstat::cli::Centre::spectral;
  if (o.budget) c.budget = *o.budget;
  if (o.bins) c.bins = *o.bins;
  if (!o.criteria.empty()) c.criteria = o.criteria;
  if (o.inject_fault) c.inject_fault = true;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Digit statistics of multidimensional continued fractions"};
  app.require_subcommand(1);
  Overrides o;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"enumerate", "write every trajectory up to the weight bound (trajectories.csv)"},
      {"stats", "ensemble size, growth constant and digit frequencies (summary.json)"},
      {"clt", "central limit diagnostics over a Q-grid (summary.json, histogram.csv)"},
      {"ldp", "large-deviation proportions over a Q-grid (summary.json)"},
      {"spectral", "transfer-operator constants and invariant density (constants.json, density.csv)"},
      {"verify", "run the acceptance criteria (report.txt, report.json)"},
  };
  for (const auto& [name, help] : commands) add_options(app.add_subcommand(name, help), o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cfstat::cli::kSuccess : cfstat::cli::kValidationError;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    return cfstat::cli::run_command(name, merge(o), std::cout);
  } catch (const std::exception& e) {
    std::cerr << "cfstat " << name << ": " << e.what() << "\n";
    return cfstat::cli::exit_code_for(e);
  }
}
