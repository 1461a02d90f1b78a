#include <gtest/gtest.h>

#include <cmath>

#include "cfstat/errors.hpp"
#include "cfstat/spectral.hpp"
#include "cfstat/witnesses.hpp"

using namespace cfstat;

namespace {

constexpr double kPi = 3.14159265358979323846;

OperatorConfig cfg(int grid, std::int64_t jmax) {
  OperatorConfig c;
  c.grid = grid;
  c.jmax = jmax;
  return c;
}

// Shared Gauss operator with targets {1, 2}: derivatives are computed once.
const EigenDerivatives& gauss_derivatives() {
  static const EigenDerivatives d = [] {
    const auto map = MapDescriptor::gauss();
    TransferOperator op(map, TargetSet::parse(map, "1,2"), cfg(256, 2000));
    return eigenvalue_derivatives(op);
  }();
  return d;
}

}  // namespace

TEST(Grid, InterpolationIsExactForLinearFunctions) {
  GridFunction f(2, 16, 1);
  for (int i = 0; i < 16; ++i) {
    for (int j = 0; j < 16; ++j) f.at(0, i, j) = 2.0 * f.node(i) - 3.0 * f.node(j) + 1.0;
  }
  for (double x : {0.0, 0.013, 0.5, 0.97, 1.0}) {
    for (double y : {0.0, 0.21, 1.0}) EXPECT_NEAR(f.interpolate(0, x, y), 2 * x - 3 * y + 1, 1e-12);
  }
  GridFunction g(1, 8, 1, 2.0);
  EXPECT_EQ(g.sup_norm(), 2.0);
  g.scale(0.5);
  EXPECT_EQ(g.interpolate(0, 0.3), 1.0);
}

TEST(Hurwitz, TailMatchesDirectSum) {
  for (double sigma : {1.5, 2.0, 3.0, 5.0}) {
    for (double a : {3.0, 50.5, 1001.0}) {
      double direct = 0.0;
      for (int k = 0; k < 2000000; ++k) direct += std::pow(a + k, -sigma);
      // Remainder of the direct sum beyond 2e6 terms by the integral.
      direct += std::pow(a + 2000000 - 0.5, 1 - sigma) / (sigma - 1);
      EXPECT_NEAR(hurwitz_tail(sigma, a), direct, 1e-9 * direct) << sigma << " " << a;
    }
  }
}

TEST(Operator, GaussEigenvalueAndDensity) {
  const auto map = MapDescriptor::gauss();
  TransferOperator op(map, TargetSet::parse(map, "1"), cfg(512, 5000));
  const auto f = invariant_density(op);
  double err = 0.0;
  for (int k = 0; k < 512; ++k) {
    const double x = f.node(k);
    const double g = 1.0 / (std::log(2.0) * (1.0 + x));
    err = std::max(err, std::fabs(f.at(0, k) - g) / g);
  }
  EXPECT_LT(err, 1e-4);
  const auto r = leading_eigenvalue(op, 1.0, std::vector<double>{0.0});
  EXPECT_NEAR(r.eigenvalue, 1.0, 1e-5);
  EXPECT_LT(r.final_change, 1e-12);
  // At s = 2 the operator contracts.
  EXPECT_LT(leading_eigenvalue(op, 2.0, std::vector<double>{0.0}).eigenvalue, 0.5);
}

// Oracle: Lambda_j = p_j / h with the Gauss-Kuzmin digit probability
// p_j = log2(1 + 1/(j(j+2))) and entropy h = pi^2 / (6 log 2).
TEST(Operator, GaussFrequenciesMatchGaussKuzmin) {
  const auto& d = gauss_derivatives();
  const double h = kPi * kPi / (6 * std::log(2.0));
  EXPECT_NEAR(-d.lambda_s, h, 1e-5);
  for (int j = 1; j <= 2; ++j) {
    const double p = std::log2(1.0 + 1.0 / (j * (j + 2.0)));
    EXPECT_NEAR(d.frequencies[static_cast<std::size_t>(j - 1)], p / h, 1e-5);
  }
  // Centring removes the first-order t-dependence.
  for (double c : d.centred_lambda_t) EXPECT_NEAR(c, 0.0, 1e-7);
}

TEST(Operator, GaussCovarianceIsPositiveDefinite) {
  const auto& d = gauss_derivatives();
  EXPECT_TRUE(d.sigma_positive_definite);
  EXPECT_NEAR(d.sigma(0, 1), d.sigma(1, 0), 1e-15);
  EXPECT_GT(d.sigma(0, 0), 0.15);
  EXPECT_LT(d.sigma(0, 0), 0.25);
}

TEST(Operator, BrunDensityMatchesPermutationSum) {
  const auto map = MapDescriptor::brun(2);
  const int G = 48;
  TransferOperator op(map, TargetSet::parse(map, "1"), cfg(G, 256));
  const auto r = leading_eigenvalue(op, 1.0, std::vector<double>{0.0});
  EXPECT_NEAR(r.eigenvalue, 1.0, 5e-3);
  auto rho = [](double x, double y) { return 1.0 / ((1 + x) * (1 + x + y)) + 1.0 / ((1 + y) * (1 + x + y)); };
  // Compare shapes through the ratio to the value at the first node.
  const double f0 = r.eigenfunction.at(0, 0, 0), r0 = rho(r.eigenfunction.node(0), r.eigenfunction.node(0));
  double err = 0.0;
  for (int i = 0; i < G; i += 5) {
    for (int j = 0; j < G; j += 5) {
      const double x = r.eigenfunction.node(i), y = r.eigenfunction.node(j);
      err = std::max(err, std::fabs(r.eigenfunction.at(0, i, j) / f0 - rho(x, y) / r0) / (rho(x, y) / r0));
    }
  }
  EXPECT_LT(err, 5e-2);
}

TEST(Operator, JacobiPerronEigenvalueNearOne) {
  const auto map = MapDescriptor::jacobi_perron();
  TransferOperator op(map, TargetSet::parse(map, "0:1"), cfg(32, 32));
  const auto r = leading_eigenvalue(op, 1.0, std::vector<double>{0.0});
  EXPECT_NEAR(r.eigenvalue, 1.0, 1e-2);
  EXPECT_GT(r.tail_error_bar, 0.0);
  EXPECT_EQ(r.eigenfunction.cells(), 2);
}

TEST(Operator, MarkovCheckPassesOnCleanTables) {
  for (const auto& map : {MapDescriptor::gauss(), MapDescriptor::brun(2), MapDescriptor::jacobi_perron()}) {
    EXPECT_NO_THROW(TransferOperator(BranchTable(map, 40, TargetSet{}), cfg(32, 40))) << map.name();
  }
}

TEST(Operator, MarkovCheckReportsInjectedFault) {
  for (const auto& map : {MapDescriptor::gauss(), MapDescriptor::brun(2), MapDescriptor::jacobi_perron()}) {
    BranchTable t(map, 40, TargetSet{});
    t.inject_fault();
    try {
      TransferOperator op(std::move(t), cfg(32, 40));
      ADD_FAILURE() << "no violation for " << map.name();
    } catch (const MarkovViolation& e) {
      EXPECT_NE(e.trace().find("branch"), std::string::npos) << e.trace();
      EXPECT_NE(e.trace().find("node"), std::string::npos) << e.trace();
    }
  }
}

TEST(Operator, PowerIterationReportsNonConvergence) {
  const auto map = MapDescriptor::gauss();
  TransferOperator op(map, TargetSet::parse(map, "1"), cfg(64, 100));
  SpectralOptions o;
  o.max_iter = 2;
  try {
    leading_eigenvalue(op, 1.0, std::vector<double>{0.0}, o);
    FAIL() << "expected ConvergenceFailure";
  } catch (const ConvergenceFailure& e) {
    EXPECT_FALSE(e.ratio_trace().empty());
  }
}

TEST(Witnesses, GaussClosedForms) {
  const auto w = nonarithmeticity_witnesses(MapDescriptor::gauss());
  EXPECT_NEAR(w.witness1, -2 * std::log((1 + std::sqrt(5.0)) / 2), 1e-12);
  EXPECT_NEAR(w.witness2, -2 * std::log(1 + std::sqrt(2.0)), 1e-12);
  EXPECT_LT(w.fixed_point_residual1, 1e-12);
  EXPECT_GT(w.ratio_cf.size(), 10u);
}

TEST(Witnesses, BrunRootsSatisfyCubics) {
  const auto w = nonarithmeticity_witnesses(MapDescriptor::brun(2));
  const double t = w.root1, r = w.root2;
  EXPECT_NEAR(t * t * t + t - 1, 0.0, 1e-12);
  EXPECT_NEAR(r * r * r + 2 * r - 1, 0.0, 1e-12);
  EXPECT_LT(w.fixed_point_residual1, 1e-12);
  EXPECT_LT(w.fixed_point_residual2, 1e-12);
  // |J| = (j + r^2)^{-3} at (r^2, r), and j + r^2 = 1/r from the cubic.
  EXPECT_NEAR(w.witness1, 3 * std::log(t), 1e-12);
  EXPECT_NEAR(w.witness2, 3 * std::log(r), 1e-12);
  EXPECT_THROW(nonarithmeticity_witnesses(MapDescriptor::jacobi_perron()), ValidationError);
}
