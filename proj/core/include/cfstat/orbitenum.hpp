#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "cfstat/cfmaps.hpp"

namespace cfstat {

/// Partial quotients of p/q with the last one >= 2.
std::vector<Digit> euclid_digits(std::int64_t p, std::int64_t q);

struct BrunGcdResult {
  std::vector<Digit> digits;
  std::int64_t gcd = 0;
};

/// Sorted Brun GCD algorithm on m+1 non-negative integers: repeatedly divide the
/// largest entry by the second largest until one nonzero entry remains. Digits
/// carry position 0.
BrunGcdResult brun_gcd_digits(std::span<const std::int64_t> t);

/// Integer Jacobi-Perron expansion of (p/q, r/q): admissible, last b >= 2, and
/// composing the inverse branches maps (0,0) back to the point. When the floor
/// conventions hit a cell boundary both boundary choices are explored (floor
/// first). Throws DomainError if the point is not reachable from (0,0).
std::vector<Digit> jp_digits(std::int64_t p, std::int64_t r, std::int64_t q);
std::optional<std::vector<Digit>> try_jp_digits(std::int64_t p, std::int64_t r, std::int64_t q);

/// Canonical digit string of a rational point of X, or nullopt if the point is
/// outside X (terminal, or not reachable for JP).
std::optional<std::vector<Digit>> canonical_digits(const MapDescriptor& map, const RationalPoint& x);

/// Applies h_{d_1} o ... o h_{d_n} to the homogeneous base point with
/// overflow-checked integers. The last entry is the weight denominator.
std::vector<std::int64_t> reconstruct_homogeneous(const MapDescriptor& map, std::span<const Digit> digits);

struct TrajectoryRecord {
  RationalPoint point;
  std::span<const Digit> digits;
  int depth = 0;
  /// Exact weight is weight_coefficient * log(weight_denominator).
  int weight_coefficient = 0;
  std::int64_t weight_denominator = 0;
  double weight = 0.0;
};

struct EnumerationOptions {
  /// Worker count for partitioned consumers.
  int threads = 1;
  /// Upper limit on candidate points examined.
  std::uint64_t budget = 400'000'000ULL;
  /// Reconstruct every point from its digits and fail on mismatch.
  bool verify_round_trip = false;
  /// Number of denominator partitions; fixed so results do not depend on threads.
  int partitions = 64;
};

struct EnumerationStats {
  std::uint64_t records = 0;
  std::uint64_t candidates = 0;
  /// JP coprime triples that no admissible digit string reaches.
  std::uint64_t unreachable = 0;
  /// Brun points whose exact weight exceeded the bound.
  std::uint64_t weight_filtered = 0;
  std::uint64_t round_trip_failures = 0;

  EnumerationStats& operator+=(const EnumerationStats& o);
};

struct DenominatorRange {
  std::int64_t lo = 0;
  std::int64_t hi = 0;  // inclusive
};

/// Largest denominator q with (m+1) log q <= Q (inclusive up to 1e-12 relative).
std::int64_t denominator_bound(const MapDescriptor& map, double Q);
double weight_for_denominator(const MapDescriptor& map, std::int64_t q);
std::uint64_t candidate_count(const MapDescriptor& map, std::int64_t n);

/// Splits [1, n] into contiguous ranges of roughly equal work.
std::vector<DenominatorRange> partition_denominators(const MapDescriptor& map, std::int64_t n, int parts);

using TrajectoryVisitor = std::function<void(const TrajectoryRecord&)>;

/// Sequential enumeration of all points of X with denominator in `range` and
/// weight <= Q, ordered by denominator then lexicographic numerators.
EnumerationStats enumerate_range(const MapDescriptor& map, double Q, DenominatorRange range,
                                 const TrajectoryVisitor& visit, const EnumerationOptions& options = {});

/// Full enumeration with weight <= Q, sequential, in deterministic order.
/// Parallel consumers combine partition_denominators, enumerate_range and
/// run_partitions with per-partition accumulators instead.
/// Throws BudgetExceeded before any work if the candidate count is too large.
EnumerationStats enumerate_trajectories(const MapDescriptor& map, double Q, const TrajectoryVisitor& visit,
                                        const EnumerationOptions& options = {});

void check_budget(const MapDescriptor& map, double Q, const EnumerationOptions& options);

/// Runs job(k) for k in [0, count) on up to `threads` workers.
void run_partitions(std::size_t count, int threads, const std::function<void(std::size_t)>& job);

}  // namespace cfstat
