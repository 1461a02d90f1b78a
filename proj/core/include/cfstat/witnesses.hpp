#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "cfstat/cfmaps.hpp"

namespace cfstat {

/// Root of f on [lo, hi] by bisection; throws DomainError if f(lo), f(hi) do not bracket.
double bisect(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-14);

/// Two periodic points whose log-derivatives are rationally independent.
struct WitnessPair {
  // Parameter of each periodic point: Gauss fixed point of h_1, h_2; Brun tau_m, rho_m.
  double root1 = 0.0;
  double root2 = 0.0;
  // Residual of the defining equation at each root.
  double residual1 = 0.0;
  double residual2 = 0.0;
  // Fixed-point residual |h(x) - x|_inf for the periodic point.
  double fixed_point_residual1 = 0.0;
  double fixed_point_residual2 = 0.0;
  Digit digit1;
  Digit digit2;
  // log|J_h| at the fixed points.
  double witness1 = 0.0;
  double witness2 = 0.0;
  /// Continued fraction of witness1 / witness2 (irrationality diagnostic).
  std::vector<std::int64_t> ratio_cf;
};

/// Gauss and Brun only; Jacobi-Perron non-arithmeticity rests on a field-degree
/// argument and is not computed (ValidationError).
WitnessPair nonarithmeticity_witnesses(const MapDescriptor& map);

/// Partial quotients of x, up to `depth` terms (stops early once the remainder vanishes).
std::vector<std::int64_t> continued_fraction(double x, int depth = 20);

}  // namespace cfstat
