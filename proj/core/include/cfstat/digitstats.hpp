#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "cfstat/cfmaps.hpp"
#include "cfstat/orbitenum.hpp"
#include "cfstat/targets.hpp"

namespace cfstat {

/// Row-major square matrix.
struct Matrix {
  std::size_t n = 0;
  std::vector<double> a;

  Matrix() = default;
  explicit Matrix(std::size_t dim) : n(dim), a(dim * dim, 0.0) {}
  double& operator()(std::size_t r, std::size_t c) { return a[r * n + c]; }
  double operator()(std::size_t r, std::size_t c) const { return a[r * n + c]; }
};

/// Cholesky factorisation; succeeds if every pivot is >= floor (pivots in
/// [floor, 0] are treated as zero, i.e. positive semidefinite).
bool cholesky_ok(const Matrix& m, double floor = -1e-12);

/// Compressed enumeration: one atom per distinct (weight denominator, count
/// vector) with its multiplicity, sorted by denominator then counts. Every
/// statistic is a function of the atoms, so smaller weight bounds are prefixes.
class Ensemble {
 public:
  Ensemble() = default;
  Ensemble(MapDescriptor map, TargetSet targets, double Q);

  const MapDescriptor& map() const noexcept { return map_; }
  const TargetSet& targets() const noexcept { return targets_; }
  std::size_t dimension() const noexcept { return targets_.size(); }
  double bound() const noexcept { return Q_; }

  std::size_t atom_count() const noexcept { return den_.size(); }
  std::int64_t denominator(std::size_t k) const { return den_[k]; }
  std::span<const std::int32_t> counts(std::size_t k) const {
    return {counts_.data() + k * dimension(), dimension()};
  }
  std::uint64_t multiplicity(std::size_t k) const { return mult_[k]; }
  double weight(std::size_t k) const;

  /// Number of atoms with weight <= Q (Q must not exceed the build bound).
  std::size_t prefix(double Q) const;
  /// Number of points with weight <= Q.
  std::uint64_t size(double Q) const;
  std::uint64_t size() const { return size(Q_); }

  const EnumerationStats& stats() const noexcept { return stats_; }
  /// Records whose target counts exceeded their depth (must stay 0).
  std::uint64_t depth_violations() const noexcept { return depth_violations_; }

  /// Appends one denominator's atoms; denominators must be added in increasing order.
  void append_atom(std::int64_t den, std::span<const std::int32_t> counts, std::uint64_t mult);
  void append(const Ensemble& tail);
  void add_stats(const EnumerationStats& s) { stats_ += s; }
  void add_depth_violations(std::uint64_t v) { depth_violations_ += v; }

 private:
  MapDescriptor map_ = MapDescriptor::gauss();
  TargetSet targets_;
  double Q_ = 0.0;
  std::vector<std::int64_t> den_;
  std::vector<std::int32_t> counts_;
  std::vector<std::uint64_t> mult_;
  EnumerationStats stats_;
  std::uint64_t depth_violations_ = 0;
};

/// Enumerates X up to weight Q in fixed denominator partitions (optionally on
/// several threads) and compresses the records into atoms. The result does not
/// depend on the thread count.
Ensemble build_ensemble(const MapDescriptor& map, const TargetSet& targets, double Q,
                        const EnumerationOptions& options = {});

/// phi_i = N_i - w * Lambda_i.
std::vector<double> centre(std::span<const std::int64_t> counts, double w, std::span<const double> lambda);

/// (sum N_k) / (Q * #) per target over the points with weight <= Q.
std::vector<double> empirical_lambda(const Ensemble& e, double Q);

struct GrowthResult {
  std::uint64_t count = 0;
  double normalized = 0.0;  // count * e^{-Q}
};
GrowthResult growth_constant(const Ensemble& e, double Q);

/// Sup distance between the weighted empirical CDF of `values` and `cdf`.
double ks_distance(std::span<const double> values, std::span<const double> weights,
                   const std::function<double(double)>& cdf);
double normal_cdf(double x, double sigma);
double ks_distance_normal(std::span<const double> values, std::span<const double> weights, double sigma);

/// Samples phi/sqrt(Q): d values per atom plus atom multiplicities.
struct CentredSample {
  std::size_t d = 0;
  std::vector<double> values;
  std::vector<double> weights;
  double total_weight = 0.0;
};
CentredSample centred_sample(const Ensemble& e, std::span<const double> lambda, double Q);

struct Histogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> counts;
  double underflow = 0.0;
  double overflow = 0.0;
};

struct MomentEntry {
  std::vector<int> index;  // multi-index p
  double value = 0.0;      // pi_p(Q) / (# Q^{|p|/2})
  double wick = 0.0;       // Gaussian prediction from the reference covariance
};

struct EmpiricalSummary {
  std::uint64_t size = 0;
  double Q = 0.0;
  std::vector<double> mean_count_over_Q;  // also the empirical Lambda
  std::vector<double> mean_phi;           // mean of phi / sqrt(Q)
  Matrix covariance;                      // second moment of phi / sqrt(Q)
  std::vector<double> ks;                 // per marginal vs N(0, sigma_ii)
  std::vector<double> ks_sigma2;          // the sigma^2 used for each KS distance
  std::vector<Histogram> histograms;
  std::vector<MomentEntry> moments;
  bool low_confidence = false;
};

/// lambda centres the counts; reference_sigma (may be empty) supplies the
/// Gaussian used for KS, histogram range and Wick values, falling back to the
/// empirical covariance.
EmpiricalSummary clt_summary(const Ensemble& e, std::span<const double> lambda, double Q,
                             const std::optional<Matrix>& reference_sigma = std::nullopt, int bins = 101);

Matrix empirical_covariance(const CentredSample& s);
std::vector<MomentEntry> moment_table(const CentredSample& s, const Matrix& reference, int max_order = 4);
std::vector<MomentEntry> moment_table(const Ensemble& e, std::span<const double> lambda, double Q,
                                      int max_order = 4);

/// Isserlis/Wick value of E[prod X_i^{p_i}] for a centred Gaussian with covariance c.
double wick_moment(std::span<const int> index, const Matrix& c);

struct LdpResult {
  std::vector<double> Q;
  std::vector<double> proportion;
  std::vector<double> log_proportion;  // -inf where the proportion is 0
  double slope = 0.0;                  // least squares over finite log-proportions
  int fitted_points = 0;
  bool non_increasing = false;
};

/// Proportion of points with |N_j/Q - Lambda_j| > eps at each Q of the grid.
LdpResult ldp_tail(const Ensemble& e, std::size_t target, double lambda_j, double eps,
                   std::span<const double> q_grid);

struct DirichletSum {
  double log_value = 0.0;
  double value = 0.0;
};
/// sum over weight <= Q of exp(-s w + <t, N>), accumulated as a log-sum-exp.
DirichletSum dirichlet_partial_sum(const Ensemble& e, double s, std::span<const double> t, double Q);

}  // namespace cfstat
