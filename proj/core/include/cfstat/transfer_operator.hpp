#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cfstat/cfmaps.hpp"
#include "cfstat/grid.hpp"
#include "cfstat/targets.hpp"

namespace cfstat {

struct BranchEntry {
  Digit digit;
  Homography h;
  int domain_cell = 0;
  std::vector<bool> image_cells;  // image_cells[c]: T(I_digit) covers cell c
  int target = -1;                // index in the target set, or -1
  // Double coefficients of h: rows (x coefficients..., constant).
  std::vector<double> coef;
  // If the denominator row depends on one coordinate only: den = den_a * x[den_k] + den_b.
  int den_k = -1;
  double den_a = 0.0;
  double den_b = 0.0;
};

/// Inverse branches truncated at digit cap `jmax` (Gauss/Brun j, JP b).
class BranchTable {
 public:
  BranchTable(const MapDescriptor& map, std::int64_t jmax, const TargetSet& targets);

  const MapDescriptor& map() const noexcept { return map_; }
  std::int64_t jmax() const noexcept { return jmax_; }
  const std::vector<BranchEntry>& entries() const noexcept { return entries_; }

  /// Deliberately breaks the table for fault-injection runs: JP gets a Markov
  /// image claim that is too large; Gauss and Brun get a branch whose image
  /// leaves the unit cube.
  void inject_fault();

 private:
  static void finalize(BranchEntry& e, int m);
  MapDescriptor map_;
  std::int64_t jmax_;
  std::vector<BranchEntry> entries_;
};

/// How the branches beyond the digit cap are treated.
enum class TailTreatment {
  omit,
  /// Add the leading-order term f(limit point) * (tail sum of |J_h|^s), with
  /// the first neglected order reported as an error bar.
  leading_order,
};

struct OperatorConfig {
  std::int64_t jmax = 0;  // 0: algorithm default (Gauss 10^4, Brun 512, JP 64)
  int grid = 0;           // 0: algorithm default (Gauss 4096, Brun 256, JP 128)
  TailTreatment tail = TailTreatment::leading_order;
  bool check_markov = true;
};

OperatorConfig default_operator_config(const MapDescriptor& map);

/// Collocation realization of L_{s,t} f(x) = sum_h |J_h(x)|^s e^{<t, e(h)>} f(h(x)).
class TransferOperator {
 public:
  TransferOperator(const MapDescriptor& map, const TargetSet& targets, OperatorConfig config = {});
  TransferOperator(BranchTable table, OperatorConfig config);

  const MapDescriptor& map() const noexcept { return table_.map(); }
  const BranchTable& table() const noexcept { return table_; }
  const OperatorConfig& config() const noexcept { return config_; }
  int grid() const noexcept { return config_.grid; }
  std::int64_t jmax() const noexcept { return config_.jmax; }
  std::size_t target_count() const noexcept { return targets_; }

  GridFunction make_function(double fill = 0.0) const;

  /// out = L_{s,t} f. Returns the tail error bar (absolute, sup over nodes).
  double apply(const GridFunction& f, double s, std::span<const double> t, GridFunction& out) const;

  /// Checks that every branch maps every node of every cell it claims to cover
  /// into the closure of its domain cell. Throws MarkovViolation with a trace.
  void check_markov() const;

  /// Nodes of cell c that actually lie in the cell (JP: by the sign of eta - xi,
  /// diagonal nodes moved inward); all nodes for Gauss and Brun.
  bool node_in_cell(int c, std::size_t node) const;

 private:
  void build_weights(double s) const;

  BranchTable table_;
  OperatorConfig config_;
  std::size_t targets_ = 0;
  // weights_[b * G + k]: |J_h|^s for branch b at coordinate index k (single-coordinate denominators).
  mutable double cached_s_ = -1.0;
  mutable std::vector<double> weights_;
};

/// Sum_{k >= 0} (a + k)^{-sigma} for large a (Euler-Maclaurin), sigma > 1.
double hurwitz_tail(double sigma, double a);

}  // namespace cfstat
