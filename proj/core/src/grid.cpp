#include "cfstat/grid.hpp"

#include <algorithm>
#include <cmath>

#include "cfstat/errors.hpp"

namespace cfstat {

GridFunction::GridFunction(int dimension, int resolution, int cells, double fill)
    : m_(dimension), G_(resolution), cells_(cells) {
  if (dimension < 1 || dimension > 2) throw ValidationError("grid: only dimensions 1 and 2 are supported");
  if (resolution < 2) throw ValidationError("grid: resolution must be >= 2");
  if (cells < 1) throw ValidationError("grid: at least one cell");
  n_ = dimension == 1 ? static_cast<std::size_t>(resolution)
                      : static_cast<std::size_t>(resolution) * static_cast<std::size_t>(resolution);
  v_.assign(n_ * static_cast<std::size_t>(cells), fill);
}

double GridFunction::interpolate(int c, double x) const noexcept {
  int i;
  double f;
  grid_locate(x, G_, i, f);
  const double* p = v_.data() + static_cast<std::size_t>(c) * n_;
  return p[i] + f * (p[i + 1] - p[i]);
}

double GridFunction::interpolate(int c, double x, double y) const noexcept {
  int i, j;
  double fx, fy;
  grid_locate(x, G_, i, fx);
  grid_locate(y, G_, j, fy);
  const double* p = v_.data() + static_cast<std::size_t>(c) * n_;
  const double* r0 = p + static_cast<std::size_t>(i) * G_;
  const double* r1 = r0 + G_;
  const double a = r0[j] + fy * (r0[j + 1] - r0[j]);
  const double b = r1[j] + fy * (r1[j + 1] - r1[j]);
  return a + fx * (b - a);
}

double GridFunction::interpolate(int c, std::span<const double> x) const {
  if (static_cast<int>(x.size()) != m_) throw ValidationError("grid: point dimension mismatch");
  return m_ == 1 ? interpolate(c, x[0]) : interpolate(c, x[0], x[1]);
}

double GridFunction::sup_norm() const noexcept {
  double s = 0.0;
  for (double v : v_) s = std::max(s, std::fabs(v));
  return s;
}

void GridFunction::scale(double factor) noexcept {
  for (double& v : v_) v *= factor;
}

}  // namespace cfstat
