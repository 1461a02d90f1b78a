#include "cfstat/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

namespace cfstat {

namespace {

double sup_in_cells(const TransferOperator& op, const GridFunction& f) {
  double s = 0.0;
  for (int c = 0; c < f.cells(); ++c) {
    const auto v = f.cell(c);
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (op.node_in_cell(c, k)) s = std::max(s, std::fabs(v[k]));
    }
  }
  return s;
}

double second_difference_bar(const GridFunction& f) {
  const int G = f.resolution();
  double worst = 0.0;
  for (int c = 0; c < f.cells(); ++c) {
    if (f.dimension() == 1) {
      for (int k = 1; k + 1 < G; ++k) worst = std::max(worst, std::fabs(f.at(c, k - 1) - 2 * f.at(c, k) + f.at(c, k + 1)));
    } else {
      for (int i = 0; i < G; ++i) {
        for (int j = 0; j < G; ++j) {
          if (i > 0 && i + 1 < G) {
            worst = std::max(worst, std::fabs(f.at(c, i - 1, j) - 2 * f.at(c, i, j) + f.at(c, i + 1, j)));
          }
          if (j > 0 && j + 1 < G) {
            worst = std::max(worst, std::fabs(f.at(c, i, j - 1) - 2 * f.at(c, i, j) + f.at(c, i, j + 1)));
          }
        }
      }
    }
  }
  return worst / 8.0;
}

}  // namespace

SpectralResult leading_eigenvalue(const TransferOperator& op, double s, std::span<const double> t,
                                  const SpectralOptions& options) {
  GridFunction f = op.make_function(1.0);
  GridFunction g = op.make_function();
  SpectralResult res;
  double prev = 0.0;
  double bar = 0.0;
  for (int it = 1; it <= options.max_iter; ++it) {
    bar = op.apply(f, s, t, g);
    const double lam = sup_in_cells(op, g);
    if (!(lam > 0.0) || !std::isfinite(lam)) {
      res.ratio_trace.push_back(lam);
      throw ConvergenceFailure("power iteration produced a non-positive or non-finite eigenvalue estimate",
                               res.ratio_trace);
    }
    const double change = it > 1 ? std::fabs(lam - prev) / lam : 1.0;
    res.ratio_trace.push_back(lam);
    if (res.ratio_trace.size() > 32) res.ratio_trace.erase(res.ratio_trace.begin());
    double resid = 0.0;
    for (int c = 0; c < f.cells(); ++c) {
      const auto gv = g.cell(c);
      const auto fv = f.cell(c);
      for (std::size_t k = 0; k < gv.size(); ++k) {
        if (op.node_in_cell(c, k)) resid = std::max(resid, std::fabs(gv[k] - lam * fv[k]));
      }
    }
    g.scale(1.0 / lam);
    std::swap(f, g);
    prev = lam;
    if (it > 1 && change < options.tol) {
      res.eigenvalue = lam;
      res.iterations = it;
      res.final_change = change;
      res.residual = resid / lam;
      res.tail_error_bar = bar / lam;
      res.eigenfunction = std::move(f);
      res.interpolation_error_bar = second_difference_bar(res.eigenfunction);
      return res;
    }
  }
  throw ConvergenceFailure("power iteration did not converge in " + std::to_string(options.max_iter) + " iterations",
                           res.ratio_trace);
}

double grid_integral(const TransferOperator& op, const GridFunction& f) {
  double acc = 0.0;
  const std::size_t n = f.nodes_per_cell();
  for (std::size_t k = 0; k < n; ++k) {
    int owners = 0;
    double v = 0.0;
    for (int c = 0; c < f.cells(); ++c) {
      if (op.node_in_cell(c, k)) {
        v += f.cell(c)[k];
        ++owners;
      }
    }
    if (owners) acc += v / owners;
  }
  return acc / static_cast<double>(n);
}

double grid_evaluate(const TransferOperator& op, const GridFunction& f, std::span<const double> x) {
  return f.interpolate(op.map().cell_of(x), x);
}

GridFunction invariant_density(const TransferOperator& op, const SpectralOptions& options) {
  auto r = leading_eigenvalue(op, 1.0, {}, options);
  const double integral = grid_integral(op, r.eigenfunction);
  r.eigenfunction.scale(1.0 / integral);
  return std::move(r.eigenfunction);
}

namespace {

struct DerivativePlan {
  bool t = true;
  bool hessian = true;
};

EigenDerivatives derivatives_impl(const TransferOperator& op, const DerivativeOptions& o, DerivativePlan plan) {
  const std::size_t d = op.target_count();
  EigenDerivatives r;
  auto lam = [&](double s, const std::vector<double>& t) {
    ++r.solves;
    return leading_eigenvalue(op, s, t, o.spectral).eigenvalue;
  };
  const std::vector<double> zero(d, 0.0);
  auto richardson_first = [](const std::function<double(double)>& F, double h) {
    const double d1 = (F(h) - F(-h)) / (2 * h);
    const double d2 = (F(h / 2) - F(-h / 2)) / h;
    return (4 * d2 - d1) / 3;
  };
  auto richardson_second = [](const std::function<double(double)>& F, double f0, double h) {
    const double s1 = (F(h) - 2 * f0 + F(-h)) / (h * h);
    const double s2 = (F(h / 2) - 2 * f0 + F(-h / 2)) / (h * h / 4);
    return (4 * s2 - s1) / 3;
  };

  r.lambda = lam(1.0, zero);
  const double h1 = o.h_first;
  const double h2 = o.h_second;
  r.lambda_s = richardson_first([&](double e) { return lam(1.0 + e, zero); }, h1);
  if (!plan.t || d == 0) return r;

  r.lambda_t.resize(d);
  r.frequencies.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    r.lambda_t[i] = richardson_first(
        [&](double e) {
          auto t = zero;
          t[i] = e;
          return lam(1.0, t);
        },
        h1);
    r.frequencies[i] = -r.lambda_t[i] / r.lambda_s;
  }

  // Normalised eigenvalue. With weights |J_h|^s = e^{-s w}, centring N by w Lambda
  // shifts s upward: lambda(1, t) = lambda~(1 + <Lambda, t>, t).
  auto centred = [&](const std::vector<double>& t) {
    double shift = 0.0;
    for (std::size_t i = 0; i < d; ++i) shift += r.frequencies[i] * t[i];
    return lam(1.0 + shift, t);
  };
  if (!plan.hessian) return r;

  r.centred_lambda_t.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    r.centred_lambda_t[i] = richardson_first(
        [&](double e) {
          auto t = zero;
          t[i] = e;
          return centred(t);
        },
        h1);
  }
  r.hessian = Matrix(d);
  const double c0 = r.lambda;
  for (std::size_t i = 0; i < d; ++i) {
    r.hessian(i, i) = richardson_second(
        [&](double e) {
          auto t = zero;
          t[i] = e;
          return centred(t);
        },
        c0, h2);
    for (std::size_t k = 0; k < i; ++k) {
      auto mixed = [&](double h) {
        auto at = [&](double a, double b) {
          auto t = zero;
          t[i] = a;
          t[k] = b;
          return centred(t);
        };
        return (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4 * h * h);
      };
      const double m1 = mixed(h2);
      const double m2 = mixed(h2 / 2);
      r.hessian(i, k) = r.hessian(k, i) = (4 * m2 - m1) / 3;
    }
  }
  r.sigma = Matrix(d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      r.sigma(i, k) = -0.5 * (r.hessian(i, k) + r.hessian(k, i)) / r.lambda_s;
    }
  }
  r.sigma_positive_definite = cholesky_ok(r.sigma, 0.0);
  for (std::size_t i = 0; i < d; ++i) r.sigma_positive_definite = r.sigma_positive_definite && r.sigma(i, i) > 0.0;
  return r;
}

}  // namespace

EigenDerivatives eigenvalue_derivatives(const TransferOperator& op, const DerivativeOptions& options) {
  return derivatives_impl(op, options, {true, true});
}

std::vector<double> frequency_constants(const TransferOperator& op, const DerivativeOptions& options) {
  return derivatives_impl(op, options, {true, false}).frequencies;
}

Matrix covariance_matrix(const TransferOperator& op, const DerivativeOptions& options) {
  return derivatives_impl(op, options, {true, true}).sigma;
}

double entropy_estimate(const TransferOperator& op, const DerivativeOptions& options) {
  return -derivatives_impl(op, options, {false, false}).lambda_s;
}

}  // namespace cfstat
