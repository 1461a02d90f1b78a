#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cfstat/homography.hpp"

namespace cfstat {

enum class Algorithm { gauss, brun, jacobi_perron };

std::string to_string(Algorithm a);

/// Counting identity of a digit. Gauss and Brun use `b` only (a == -1);
/// Jacobi-Perron uses the pair (a, b).
struct DigitLabel {
  std::int64_t a = -1;
  std::int64_t b = 0;

  friend auto operator<=>(const DigitLabel&, const DigitLabel&) = default;
};

std::string to_string(const DigitLabel& label);

/// Branch label of one step.
///   Gauss: j = partial quotient.
///   Brun:  j = partial quotient, position = index (1-based) of the max coordinate.
///   JP:    j = b = floor(1/xi), a = floor(eta/xi).
struct Digit {
  Algorithm algorithm = Algorithm::gauss;
  std::int64_t j = 1;
  std::int64_t a = 0;
  int position = 0;

  static Digit gauss(std::int64_t j);
  /// position 0 means "unspecified" (integer Brun GCD digits carry no position).
  static Digit brun(int position, std::int64_t j);
  static Digit jp(std::int64_t a, std::int64_t b);

  DigitLabel label() const noexcept;

  friend bool operator==(const Digit&, const Digit&) = default;
};

std::string to_string(const Digit& d);

struct Point {
  std::vector<double> coords;
};

/// Exact point of [0,1]^m: numerators over a shared positive denominator.
struct RationalPoint {
  std::vector<std::int64_t> numerators;
  std::int64_t denominator = 1;

  /// Divides out the common gcd; throws ValidationError on a non-positive denominator.
  void normalize();
  bool is_zero() const noexcept;
  Point to_point() const;
  friend bool operator==(const RationalPoint&, const RationalPoint&) = default;
};

std::string to_string(const RationalPoint& p);

class MapDescriptor {
 public:
  static MapDescriptor gauss();
  static MapDescriptor brun(int m);
  /// Only m = 2 is implemented.
  static MapDescriptor jacobi_perron(int m = 2);

  Algorithm algorithm() const noexcept { return algorithm_; }
  int dimension() const noexcept { return dim_; }
  std::string name() const;

  /// Canonical terminator x_0 (the origin) and its homogeneous integer form.
  Point base_point() const;
  std::vector<std::int64_t> base_point_homogeneous() const;

  /// Markov cells: Gauss and Brun have the single cell I; JP has
  /// P_1 = {xi < eta} (index 0) and P_2 = {xi > eta} (index 1).
  int cell_count() const noexcept { return algorithm_ == Algorithm::jacobi_perron ? 2 : 1; }
  int cell_of(std::span<const double> x) const;
  /// Cell containing the branch domain I_digit.
  int domain_cell(const Digit& d) const;
  /// True if T(I_digit) covers cell `cell`.
  bool image_covers(const Digit& d, int cell) const;

  /// Throws ValidationError if the payload does not belong to this map.
  void validate(const Digit& d) const;

  bool admissible(const Digit& prev, const Digit& next) const;
  bool terminal_ok(const Digit& last) const;

  friend bool operator==(const MapDescriptor&, const MapDescriptor&) = default;

 private:
  MapDescriptor(Algorithm a, int m) : algorithm_(a), dim_(m) {}
  Algorithm algorithm_ = Algorithm::gauss;
  int dim_ = 1;
};

/// Parses "gauss", "brun2", "brun3", "jp2" (also "brunN" for N >= 1).
MapDescriptor parse_algorithm(const std::string& name);

// Forward maps in double precision. Terminal inputs throw Terminated.
std::pair<double, Digit> gauss_forward(double x);
std::pair<Point, Digit> brun_forward(const Point& x);
std::pair<Point, Digit> jp_forward(const Point& x);
std::pair<Point, Digit> forward(const MapDescriptor& map, const Point& x);

// Exact forward maps: integer division only.
std::pair<RationalPoint, Digit> gauss_forward_exact(const RationalPoint& x);
std::pair<RationalPoint, Digit> brun_forward_exact(const RationalPoint& x);
std::pair<RationalPoint, Digit> jp_forward_exact(const RationalPoint& x);
std::pair<RationalPoint, Digit> forward_exact(const MapDescriptor& map, const RationalPoint& x);

Homography inverse_branch(const MapDescriptor& map, const Digit& d);

/// h_{d_1} o ... o h_{d_n}.
Homography compose_digits(const MapDescriptor& map, std::span<const Digit> digits);

/// log|J_h(x)|; weight_of is its negation.
double log_jacobian(const MapDescriptor& map, const Homography& h, const Point& x);
double weight_of(const MapDescriptor& map, const Homography& h, const Point& x);

/// Forward log|T'| at x for the digit taken there: (m+1) log(1/x_i) with x_i
/// the dividing coordinate.
double forward_log_jacobian(const MapDescriptor& map, const Point& x);

}  // namespace cfstat
