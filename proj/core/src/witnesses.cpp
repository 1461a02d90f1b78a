#include "cfstat/witnesses.hpp"

#include <algorithm>
#include <cmath>

namespace cfstat {

double bisect(const std::function<double(double)>& f, double lo, double hi, double tol) {
  double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo < 0) == (fhi < 0)) throw DomainError("bisect: endpoints do not bracket a root");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::vector<std::int64_t> continued_fraction(double x, int depth) {
  std::vector<std::int64_t> out;
  for (int k = 0; k < depth; ++k) {
    const double a = std::floor(x);
    out.push_back(static_cast<std::int64_t>(a));
    const double frac = x - a;
    if (frac < 1e-12) break;
    x = 1.0 / frac;
    if (x > 1e15) break;
  }
  return out;
}

namespace {

double fixed_point_residual(const MapDescriptor& map, const Digit& d, const Point& x) {
  const auto y = inverse_branch(map, d).apply(x.coords);
  double r = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) r = std::max(r, std::fabs(y[k] - x.coords[k]));
  return r;
}

}  // namespace

WitnessPair nonarithmeticity_witnesses(const MapDescriptor& map) {
  WitnessPair w;
  switch (map.algorithm()) {
    case Algorithm::gauss: {
      // Fixed point of h_j: x (j + x) = 1.
      auto root = [](int j) { return bisect([j](double x) { return x * (j + x) - 1.0; }, 0.0, 1.0); };
      w.root1 = root(1);
      w.root2 = root(2);
      w.residual1 = w.root1 * (1 + w.root1) - 1.0;
      w.residual2 = w.root2 * (2 + w.root2) - 1.0;
      w.digit1 = Digit::gauss(1);
      w.digit2 = Digit::gauss(2);
      const Point p1{{w.root1}}, p2{{w.root2}};
      w.fixed_point_residual1 = fixed_point_residual(map, w.digit1, p1);
      w.fixed_point_residual2 = fixed_point_residual(map, w.digit2, p2);
      w.witness1 = log_jacobian(map, inverse_branch(map, w.digit1), p1);
      w.witness2 = log_jacobian(map, inverse_branch(map, w.digit2), p2);
      break;
    }
    case Algorithm::brun: {
      const int m = map.dimension();
      // tau_m: x^{m+1} + x - 1 = 0;  rho_m: x^{m+1} + 2x - 1 = 0.
      auto poly1 = [m](double x) { return std::pow(x, m + 1) + x - 1.0; };
      auto poly2 = [m](double x) { return std::pow(x, m + 1) + 2.0 * x - 1.0; };
      w.root1 = bisect(poly1, 0.0, 1.0);
      w.root2 = bisect(poly2, 0.0, 1.0);
      w.residual1 = poly1(w.root1);
      w.residual2 = poly2(w.root2);
      // Periodic point (r^m, r^{m-1}, ..., r): the max sits in the last slot and
      // 1/r - j = r^m, so one step of the branch (m, j) fixes it.
      auto periodic = [m](double r) {
        Point p;
        for (int k = m; k >= 1; --k) p.coords.push_back(std::pow(r, k));
        return p;
      };
      const Point p1 = periodic(w.root1), p2 = periodic(w.root2);
      w.digit1 = Digit::brun(m, 1);
      w.digit2 = Digit::brun(m, 2);
      w.fixed_point_residual1 = fixed_point_residual(map, w.digit1, p1);
      w.fixed_point_residual2 = fixed_point_residual(map, w.digit2, p2);
      w.witness1 = log_jacobian(map, inverse_branch(map, w.digit1), p1);
      w.witness2 = log_jacobian(map, inverse_branch(map, w.digit2), p2);
      break;
    }
    case Algorithm::jacobi_perron:
      throw ValidationError(
          "witnesses: not computed for jacobi-perron (non-arithmeticity follows from a field-degree argument)");
  }
  w.ratio_cf = continued_fraction(w.witness1 / w.witness2, 20);
  return w;
}

}  // namespace cfstat
