#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "acceptance.hpp"
#include "cfstat/digitstats.hpp"
#include "cfstat/errors.hpp"
#include "cfstat/orbitenum.hpp"
#include "cfstat/spectral.hpp"
#include "cfstat/witnesses.hpp"
#include "json_writer.hpp"

namespace cfstat::cli {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code_for(const std::exception& e) noexcept {
  if (dynamic_cast<const BudgetExceeded*>(&e) || dynamic_cast<const ArithmeticOverflow*>(&e) ||
      dynamic_cast<const std::bad_alloc*>(&e)) {
    return kResourceBudget;
  }
  if (dynamic_cast<const ConvergenceFailure*>(&e) || dynamic_cast<const MarkovViolation*>(&e)) {
    return kCriterionFailure;
  }
  return kValidationError;
}

namespace {

fs::path output_file(const ExperimentConfig& c, const std::string& name) {
  std::error_code ec;
  fs::create_directories(c.out, ec);
  if (ec) throw ValidationError("cannot create output directory " + c.out + ": " + ec.message());
  return fs::path(c.out) / name;
}

std::ofstream open_output(const fs::path& p) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + p.string());
  return out;
}

void write_json(const fs::path& p, const json& j) {
  auto out = open_output(p);
  out << dump_json(j);
  if (!out) throw ValidationError("write failed: " + p.string());
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.n; ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < m.n; ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

json header(const std::string& command, const ExperimentConfig& c) {
  json j;
  j["schema"] = std::string("cfstat.") + command + "/" + kSchemaVersion;
  j["config"] = c.to_json();
  return j;
}

std::string csv_schema_line(const std::string& name) {
  return std::string("# schema: cfstat.") + name + "/" + kSchemaVersion + "\n";
}

OperatorConfig operator_config(const ExperimentConfig& c) {
  auto oc = default_operator_config(c.map());
  if (c.grid > 0) oc.grid = c.grid;
  if (c.jmax > 0) oc.jmax = c.jmax;
  return oc;
}

EnumerationOptions enumeration_options(const ExperimentConfig& c) {
  EnumerationOptions eo;
  eo.threads = c.threads;
  eo.budget = c.budget;
  return eo;
}

struct Centring {
  std::vector<double> lambda;
  std::optional<EigenDerivatives> spectral;
};

// Spectral constants when centring spectrally; the Hessian only when asked.
Centring centring(const ExperimentConfig& c, const Ensemble& e, bool want_sigma, std::ostream& log) {
  Centring out;
  if (c.centre == Centre::empirical) {
    out.lambda = empirical_lambda(e, e.bound());
    return out;
  }
  const auto oc = operator_config(c);
  log << "spectral constants: grid " << oc.grid << ", jmax " << oc.jmax << "\n";
  TransferOperator op(c.map(), c.target_set(), oc);
  if (want_sigma) {
    out.spectral = eigenvalue_derivatives(op);
  } else {
    EigenDerivatives d;
    d.frequencies = frequency_constants(op);
    out.spectral = d;
  }
  out.lambda = out.spectral->frequencies;
  return out;
}

json base_summary(const std::string& command, const ExperimentConfig& c, const Ensemble& e, const Centring& ct) {
  json j = header(command, c);
  j["algorithm"] = e.map().name();
  j["targets"] = json::array();
  for (const auto& l : e.targets().labels()) j["targets"].push_back(to_string(l));
  j["Q"] = e.bound();
  j["size"] = e.size();
  j["atoms"] = e.atom_count();
  const auto& st = e.stats();
  j["enumeration"] = {{"records", st.records},
                      {"candidates", st.candidates},
                      {"unreachable", st.unreachable},
                      {"weight_filtered", st.weight_filtered},
                      {"depth_violations", e.depth_violations()}};
  const auto g = growth_constant(e, e.bound());
  j["growth"] = {{"count", g.count}, {"count_exp_minus_Q", g.normalized}};
  j["lambda_empirical"] = empirical_lambda(e, e.bound());
  j["lambda_spectral"] = ct.spectral ? json(ct.spectral->frequencies) : json(nullptr);
  j["centre"] = c.centre == Centre::spectral ? "spectral" : "empirical";
  if (ct.spectral && !ct.spectral->sigma.a.empty()) {
    j["covariance_spectral"] = matrix_json(ct.spectral->sigma);
    j["covariance_spectral_positive_definite"] = ct.spectral->sigma_positive_definite;
    j["entropy_spectral"] = -ct.spectral->lambda_s;
  } else {
    j["covariance_spectral"] = nullptr;
  }
  return j;
}

double max_grid(const ExperimentConfig& c, std::size_t min_points, const char* command) {
  if (c.q_grid.size() < min_points) {
    throw ValidationError(std::string(command) + ": q_grid needs at least " + std::to_string(min_points) + " points");
  }
  const double Q = c.weight_bound();
  for (double q : c.q_grid) {
    if (q > Q * (1 + 1e-12)) throw ValidationError(std::string(command) + ": q_grid value exceeds the weight bound");
  }
  return Q;
}

}  // namespace

int cmd_enumerate(const ExperimentConfig& c, std::ostream& log) {
  validate(c, true);
  const auto map = c.map();
  const auto targets = c.target_set();
  const double Q = c.weight_bound();
  const auto eo = enumeration_options(c);
  check_budget(map, Q, eo);
  auto out = open_output(output_file(c, "trajectories.csv"));
  out << csv_schema_line("trajectories");
  out << "denominator";
  for (int k = 1; k <= map.dimension(); ++k) out << ",p" << k;
  out << ",depth,weight";
  for (const auto& l : targets.labels()) out << ",N_" << to_string(l);
  out << "\n";
  std::vector<std::int64_t> counts;
  const auto stats = enumerate_trajectories(
      map, Q,
      [&](const TrajectoryRecord& r) {
        out << r.point.denominator;
        for (auto p : r.point.numerators) out << ',' << p;
        out << ',' << r.depth << ',' << format_double(r.weight);
        counts = count_digits(r.digits, targets);
        for (auto n : counts) out << ',' << n;
        out << '\n';
      },
      eo);
  if (!out) throw ValidationError("write failed: trajectories.csv");
  log << "enumerate: " << stats.records << " trajectories";
  if (stats.unreachable) log << ", " << stats.unreachable << " unreachable points skipped";
  log << "\n";
  return kSuccess;
}

int cmd_stats(const ExperimentConfig& c, std::ostream& log) {
  validate(c, true);
  const auto e = build_ensemble(c.map(), c.target_set(), c.weight_bound(), enumeration_options(c));
  const auto ct = centring(c, e, false, log);
  write_json(output_file(c, "summary.json"), base_summary("stats", c, e, ct));
  log << "stats: " << e.size() << " points, " << e.atom_count() << " atoms\n";
  return kSuccess;
}

int cmd_clt(const ExperimentConfig& c, std::ostream& log) {
  validate(c, true);
  const double Q = max_grid(c, 2, "clt");
  const auto e = build_ensemble(c.map(), c.target_set(), Q, enumeration_options(c));
  const auto ct = centring(c, e, true, log);
  json j = base_summary("clt", c, e, ct);
  std::optional<Matrix> reference;
  if (ct.spectral) reference = ct.spectral->sigma;

  auto hist = open_output(output_file(c, "histogram.csv"));
  hist << csv_schema_line("histogram");
  hist << "Q,target,bin,lo,hi,weight\n";
  j["clt"] = json::array();
  for (double q : c.q_grid) {
    const auto s = clt_summary(e, ct.lambda, q, reference, c.bins);
    json row;
    row["Q"] = q;
    row["size"] = s.size;
    row["low_confidence"] = s.low_confidence;
    row["lambda_empirical"] = s.mean_count_over_Q;
    row["mean_phi"] = s.mean_phi;
    row["covariance_empirical"] = matrix_json(s.covariance);
    row["ks"] = s.ks;
    row["ks_sigma2"] = s.ks_sigma2;
    row["moments"] = json::array();
    for (const auto& m : s.moments) row["moments"].push_back({{"index", m.index}, {"value", m.value}, {"wick", m.wick}});
    row["histogram_tails"] = json::array();
    for (std::size_t t = 0; t < s.histograms.size(); ++t) {
      const auto& h = s.histograms[t];
      row["histogram_tails"].push_back({{"underflow", h.underflow}, {"overflow", h.overflow}});
      const double width = (h.hi - h.lo) / static_cast<double>(h.counts.size());
      for (std::size_t b = 0; b < h.counts.size(); ++b) {
        hist << format_double(q) << ',' << to_string(e.targets()[t]) << ',' << b << ','
             << format_double(h.lo + width * static_cast<double>(b)) << ','
             << format_double(h.lo + width * static_cast<double>(b + 1)) << ',' << format_double(h.counts[b]) << '\n';
      }
    }
    j["clt"].push_back(row);
    log << "clt: Q " << q << ", " << s.size << " points, KS";
    for (double k : s.ks) log << ' ' << k;
    log << "\n";
  }
  if (!hist) throw ValidationError("write failed: histogram.csv");
  write_json(output_file(c, "summary.json"), j);
  return kSuccess;
}

int cmd_ldp(const ExperimentConfig& c, std::ostream& log) {
  validate(c, true);
  const double Q = max_grid(c, 4, "ldp");
  const auto e = build_ensemble(c.map(), c.target_set(), Q, enumeration_options(c));
  const auto ct = centring(c, e, false, log);
  json j = base_summary("ldp", c, e, ct);
  j["ldp"] = json::array();
  for (std::size_t t = 0; t < e.dimension(); ++t) {
    std::vector<double> eps = c.epsilon;
    if (eps.empty()) eps.push_back(0.5 * ct.lambda[t]);
    for (double epsilon : eps) {
      const auto l = ldp_tail(e, t, ct.lambda[t], epsilon, c.q_grid);
      json logs = json::array();
      for (double v : l.log_proportion) logs.push_back(std::isfinite(v) ? json(v) : json(nullptr));
      j["ldp"].push_back({{"target", to_string(e.targets()[t])},
                          {"lambda", ct.lambda[t]},
                          {"epsilon", epsilon},
                          {"Q", l.Q},
                          {"proportion", l.proportion},
                          {"log_proportion", logs},
                          {"slope", l.fitted_points >= 2 ? json(l.slope) : json(nullptr)},
                          {"fitted_points", l.fitted_points},
                          {"non_increasing", l.non_increasing}});
      log << "ldp: target " << to_string(e.targets()[t]) << " eps " << epsilon << " slope " << l.slope << "\n";
    }
  }
  write_json(output_file(c, "summary.json"), j);
  return kSuccess;
}

int cmd_spectral(const ExperimentConfig& c, std::ostream& log) {
  validate(c, false);
  const auto map = c.map();
  const auto oc = operator_config(c);
  TransferOperator op(map, c.target_set(), oc);
  const std::vector<double> zero(op.target_count(), 0.0);
  const auto res = leading_eigenvalue(op, 1.0, zero);
  log << "spectral: lambda(1,0) " << format_double(res.eigenvalue) << " after " << res.iterations << " iterations\n";
  const auto d = eigenvalue_derivatives(op);

  // Same derivatives on a grid of half the resolution: the difference is the
  // discretization error bar.
  auto coarse_cfg = oc;
  coarse_cfg.grid = std::max(2, oc.grid / 2);
  TransferOperator coarse(map, c.target_set(), coarse_cfg);
  const auto dc = eigenvalue_derivatives(coarse);

  json j = header("constants", c);
  j["algorithm"] = map.name();
  j["grid"] = oc.grid;
  j["jmax"] = oc.jmax;
  j["targets"] = json::array();
  const auto targets = c.target_set();
  for (const auto& l : targets.labels()) j["targets"].push_back(to_string(l));
  j["eigenvalue"] = {{"value", res.eigenvalue},
                     {"iterations", res.iterations},
                     {"final_change", res.final_change},
                     {"residual", res.residual},
                     {"tail_error_bar", res.tail_error_bar},
                     {"interpolation_error_bar", res.interpolation_error_bar}};
  j["entropy"] = {{"value", -d.lambda_s}, {"error_bar", std::fabs(d.lambda_s - dc.lambda_s)}};
  json freq_err = json::array();
  for (std::size_t k = 0; k < d.frequencies.size(); ++k) freq_err.push_back(std::fabs(d.frequencies[k] - dc.frequencies[k]));
  j["frequencies"] = {{"value", d.frequencies}, {"error_bar", freq_err}};
  Matrix sigma_err(d.sigma.n);
  for (std::size_t k = 0; k < d.sigma.a.size(); ++k) sigma_err.a[k] = std::fabs(d.sigma.a[k] - dc.sigma.a[k]);
  j["sigma"] = {{"value", matrix_json(d.sigma)},
                {"error_bar", matrix_json(sigma_err)},
                {"positive_definite", d.sigma_positive_definite}};
  j["sigma2"] = json::array();
  for (std::size_t k = 0; k < d.sigma.n; ++k) j["sigma2"].push_back(d.sigma(k, k));
  j["solves"] = d.solves + dc.solves + 1;
  if (map.algorithm() == Algorithm::jacobi_perron) {
    j["witnesses"] = nullptr;
  } else {
    const auto w = nonarithmeticity_witnesses(map);
    j["witnesses"] = {{"digits", {to_string(w.digit1), to_string(w.digit2)}},
                      {"roots", {w.root1, w.root2}},
                      {"values", {w.witness1, w.witness2}},
                      {"root_residuals", {w.residual1, w.residual2}},
                      {"fixed_point_residuals", {w.fixed_point_residual1, w.fixed_point_residual2}},
                      {"ratio_continued_fraction", w.ratio_cf}};
  }
  write_json(output_file(c, "constants.json"), j);

  // Invariant density: the eigenfunction at (1, 0) with unit integral.
  auto f = res.eigenfunction;
  f.scale(1.0 / grid_integral(op, f));
  auto out = open_output(output_file(c, "density.csv"));
  out << csv_schema_line("density");
  const int G = f.resolution();
  if (f.dimension() == 1) {
    out << "cell,x,value\n";
    for (int i = 0; i < G; ++i) out << 0 << ',' << format_double(f.node(i)) << ',' << format_double(f.at(0, i)) << '\n';
  } else {
    out << "cell,x,y,value\n";
    for (int cell = 0; cell < f.cells(); ++cell) {
      for (int i = 0; i < G; ++i) {
        for (int k = 0; k < G; ++k) {
          if (!op.node_in_cell(cell, static_cast<std::size_t>(i) * G + k)) continue;
          out << cell << ',' << format_double(f.node(i)) << ',' << format_double(f.node(k)) << ','
              << format_double(f.at(cell, i, k)) << '\n';
        }
      }
    }
  }
  if (!out) throw ValidationError("write failed: density.csv");
  log << "spectral: entropy " << format_double(-d.lambda_s) << "\n";
  return kSuccess;
}

int cmd_verify(const ExperimentConfig& c, std::ostream& log) {
  validate(c, false);
  verify::AcceptanceOptions opts;
  opts.threads = c.threads;
  opts.inject_fault = c.inject_fault;
  const auto ids = verify::criterion_ids();
  for (const auto& id : c.criteria) {
    if (std::find(ids.begin(), ids.end(), id) == ids.end()) throw ValidationError("verify: unknown criterion " + id);
    opts.only.insert(id);
  }
  const auto report_txt = output_file(c, "report.txt");
  const auto results = verify::run_acceptance(opts, [&](const verify::CriterionResult& r) {
    log << verify::format_line(r) << std::endl;
  });
  json j;
  j["schema"] = std::string("cfstat.report/") + kSchemaVersion;
  j["inject_fault"] = c.inject_fault;
  j["criteria"] = json::array();
  auto txt = open_output(report_txt);
  bool all = true;
  for (const auto& r : results) {
    all = all && r.pass;
    txt << (r.pass ? "PASS " : "FAIL ") << r.id << "  " << r.title << ": " << r.detail << "\n";
    j["criteria"].push_back({{"id", r.id}, {"title", r.title}, {"pass", r.pass}, {"detail", r.detail}});
  }
  j["all_pass"] = all;
  write_json(output_file(c, "report.json"), j);
  log << (all ? "all criteria passed" : "some criteria failed") << "\n";
  return all ? kSuccess : kCriterionFailure;
}

int run_command(const std::string& name, const ExperimentConfig& c, std::ostream& log) {
  if (name == "enumerate") return cmd_enumerate(c, log);
  if (name == "stats") return cmd_stats(c, log);
  if (name == "clt") return cmd_clt(c, log);
  if (name == "ldp") return cmd_ldp(c, log);
  if (name == "spectral") return cmd_spectral(c, log);
  if (name == "verify") return cmd_verify(c, log);
  throw ValidationError("unknown command " + name);
}

}  // namespace cfstat::cli
