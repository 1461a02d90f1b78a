#pragma once

#include <span>
#include <vector>

#include "cfstat/digitstats.hpp"
#include "cfstat/grid.hpp"
#include "cfstat/transfer_operator.hpp"

namespace cfstat {

struct SpectralOptions {
  double tol = 1e-12;
  int max_iter = 100000;
};

struct SpectralResult {
  double eigenvalue = 0.0;
  GridFunction eigenfunction;  // sup-norm 1 over in-cell nodes, positive
  int iterations = 0;
  double final_change = 0.0;  // last relative change of the eigenvalue estimate
  double residual = 0.0;      // ||L f - lambda f||_inf / lambda
  double tail_error_bar = 0.0;           // relative, from the truncated branch sum
  double interpolation_error_bar = 0.0;  // relative, max |second difference| / 8
  std::vector<double> ratio_trace;       // last estimates
};

/// Power iteration from f = 1 with sup-norm renormalisation. Throws
/// ConvergenceFailure (with the ratio trace) if max_iter is reached.
SpectralResult leading_eigenvalue(const TransferOperator& op, double s, std::span<const double> t,
                                  const SpectralOptions& options = {});

/// Midpoint integral over [0,1]^m, each node taking the value of the cell it lies in.
double grid_integral(const TransferOperator& op, const GridFunction& f);

/// Value at an arbitrary point, interpolated in the cell containing it.
double grid_evaluate(const TransferOperator& op, const GridFunction& f, std::span<const double> x);

/// Eigenfunction at (s, t) = (1, 0) normalised to unit integral.
GridFunction invariant_density(const TransferOperator& op, const SpectralOptions& options = {});

struct DerivativeOptions {
  double h_first = 1e-4;
  double h_second = 1e-2;
  SpectralOptions spectral;
};

struct EigenDerivatives {
  double lambda = 0.0;                    // unnormalised lambda(1, 0)
  double lambda_s = 0.0;                  // d/ds at (1, 0)
  std::vector<double> lambda_t;           // d/dt_i of the unnormalised eigenvalue
  std::vector<double> frequencies;        // Lambda_i = -lambda_t / lambda_s
  std::vector<double> centred_lambda_t;   // d/dt_i of lambda(1 + <Lambda, t>, t)
  Matrix hessian;                         // second derivatives of the same
  Matrix sigma;                           // -hessian / lambda_s, symmetrised
  bool sigma_positive_definite = false;
  int solves = 0;
};

/// Central differences with one Richardson extrapolation each.
EigenDerivatives eigenvalue_derivatives(const TransferOperator& op, const DerivativeOptions& options = {});

/// Lambda_i = -lambda_t / lambda_s.
std::vector<double> frequency_constants(const TransferOperator& op, const DerivativeOptions& options = {});

/// Sigma = -(centred Hessian) / lambda_s.
Matrix covariance_matrix(const TransferOperator& op, const DerivativeOptions& options = {});

/// -lambda_s(1, 0): the entropy of the absolutely continuous invariant measure.
double entropy_estimate(const TransferOperator& op, const DerivativeOptions& options = {});

}  // namespace cfstat
