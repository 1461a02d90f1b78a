#include "config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "cfstat/errors.hpp"

namespace cfstat::cli {

MapDescriptor ExperimentConfig::map() const { return parse_algorithm(algorithm); }

TargetSet ExperimentConfig::target_set() const {
  const auto m = map();
  if (!targets) return TargetSet::parse(m, m.algorithm() == Algorithm::jacobi_perron ? "0:1" : "1");
  return TargetSet::parse(m, *targets);
}

double ExperimentConfig::weight_bound() const {
  if (Q) return *Q;
  if (denominator_bound) return (map().dimension() + 1) * std::log(static_cast<double>(*denominator_bound));
  throw ValidationError("config: one of Q or denominator_bound is required");
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["algorithm"] = algorithm;
  j["Q"] = Q ? nlohmann::json(*Q) : nlohmann::json(nullptr);
  j["denominator_bound"] = denominator_bound ? nlohmann::json(*denominator_bound) : nlohmann::json(nullptr);
  j["targets"] = target_set().to_string();
  j["grid"] = grid;
  j["jmax"] = jmax;
  j["epsilon"] = epsilon;
  j["q_grid"] = q_grid;
  j["centre"] = centre == Centre::spectral ? "spectral" : "empirical";
  j["budget"] = budget;
  j["bins"] = bins;
  // threads and out are deliberately absent: outputs must not depend on them.
  return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("config: expected a JSON object");
  static const std::set<std::string> known{"algorithm", "Q",       "denominator_bound", "targets", "grid",
                                           "jmax",      "epsilon", "q_grid",            "threads", "out",
                                           "centre",    "budget",  "bins",              "criteria", "inject_fault"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) throw ValidationError("config: unknown key '" + it.key() + "'");
  }
  ExperimentConfig c;
  try {
    if (j.contains("algorithm")) c.algorithm = j["algorithm"].get<std::string>();
    if (j.contains("Q") && !j["Q"].is_null()) c.Q = j["Q"].get<double>();
    if (j.contains("denominator_bound") && !j["denominator_bound"].is_null())
      c.denominator_bound = j["denominator_bound"].get<std::int64_t>();
    if (j.contains("targets")) {
      const auto& t = j["targets"];
      if (t.is_array()) {
        std::string s;
        for (const auto& e : t) s += (s.empty() ? "" : ",") + (e.is_string() ? e.get<std::string>() : e.dump());
        c.targets = s;
      } else {
        c.targets = t.get<std::string>();
      }
    }
    if (j.contains("grid")) c.grid = j["grid"].get<int>();
    if (j.contains("jmax")) c.jmax = j["jmax"].get<std::int64_t>();
    if (j.contains("epsilon")) c.epsilon = j["epsilon"].get<std::vector<double>>();
    if (j.contains("q_grid")) c.q_grid = j["q_grid"].get<std::vector<double>>();
    if (j.contains("threads")) c.threads = j["threads"].get<int>();
    if (j.contains("out")) c.out = j["out"].get<std::string>();
    if (j.contains("centre")) {
      const auto s = j["centre"].get<std::string>();
      if (s == "spectral") c.centre = Centre::spectral;
      else if (s == "empirical") c.centre = Centre::empirical;
      else throw ValidationError("config: centre must be 'spectral' or 'empirical'");
    }
    if (j.contains("budget")) c.budget = j["budget"].get<std::uint64_t>();
    if (j.contains("bins")) c.bins = j["bins"].get<int>();
    if (j.contains("criteria")) c.criteria = j["criteria"].get<std::vector<std::string>>();
    if (j.contains("inject_fault")) c.inject_fault = j["inject_fault"].get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot read " + path);
  try {
    return config_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("config: " + path + ": " + e.what());
  }
}

void validate(const ExperimentConfig& c, bool needs_bound) {
  const auto map = c.map();
  if (map.algorithm() == Algorithm::brun && map.dimension() > 3) {
    throw ValidationError("config: algorithm must be one of gauss, brun2, brun3, jp2");
  }
  if (c.Q && c.denominator_bound) throw ValidationError("config: set exactly one of Q and denominator_bound");
  if (needs_bound && !c.Q && !c.denominator_bound) {
    throw ValidationError("config: set exactly one of Q and denominator_bound");
  }
  if (c.Q && !(*c.Q > 0.0 && std::isfinite(*c.Q))) throw ValidationError("config: Q must be positive");
  if (c.denominator_bound && *c.denominator_bound < 1) throw ValidationError("config: denominator_bound must be >= 1");
  if (c.targets && c.targets->find_first_not_of(" \t,") == std::string::npos) {
    throw ValidationError("config: target set is empty");
  }
  if (c.target_set().size() == 0) throw ValidationError("config: target set is empty");
  if (c.grid < 0 || c.grid == 1) throw ValidationError("config: grid must be >= 2");
  if (c.jmax < 0) throw ValidationError("config: jmax must be positive");
  for (double e : c.epsilon) {
    if (!(e > 0.0)) throw ValidationError("config: epsilon values must be positive");
  }
  for (double q : c.q_grid) {
    if (!(q > 0.0 && std::isfinite(q))) throw ValidationError("config: q_grid values must be positive");
  }
  if (c.threads < 1) throw ValidationError("config: threads must be >= 1");
  if (c.budget == 0) throw ValidationError("config: budget must be positive");
  if (c.bins < 1) throw ValidationError("config: bins must be positive");
}

}  // namespace cfstat::cli
