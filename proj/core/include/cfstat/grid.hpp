#pragma once

#include <span>
#include <vector>

namespace cfstat {

/// Values at the midpoints (k + 1/2)/G of a uniform G^m grid on [0,1]^m, one
/// array per Markov cell. Each cell's array covers the whole square so that
/// interpolation near a cell boundary uses a smooth extension of that cell's
/// function rather than values from the neighbouring cell.
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(int dimension, int resolution, int cells, double fill = 0.0);

  int dimension() const noexcept { return m_; }
  int resolution() const noexcept { return G_; }
  int cells() const noexcept { return cells_; }
  std::size_t nodes_per_cell() const noexcept { return n_; }

  double node(int k) const noexcept { return (k + 0.5) / G_; }

  std::span<double> cell(int c) { return {v_.data() + static_cast<std::size_t>(c) * n_, n_}; }
  std::span<const double> cell(int c) const { return {v_.data() + static_cast<std::size_t>(c) * n_, n_}; }
  std::vector<double>& raw() noexcept { return v_; }
  const std::vector<double>& raw() const noexcept { return v_; }

  double& at(int c, int i) { return v_[static_cast<std::size_t>(c) * n_ + static_cast<std::size_t>(i)]; }
  double& at(int c, int i, int j) {
    return v_[static_cast<std::size_t>(c) * n_ + static_cast<std::size_t>(i) * G_ + static_cast<std::size_t>(j)];
  }
  double at(int c, int i) const { return v_[static_cast<std::size_t>(c) * n_ + static_cast<std::size_t>(i)]; }
  double at(int c, int i, int j) const {
    return v_[static_cast<std::size_t>(c) * n_ + static_cast<std::size_t>(i) * G_ + static_cast<std::size_t>(j)];
  }

  /// Linear (m = 1) or bilinear (m = 2) interpolation in cell c, extrapolating
  /// linearly beyond the outermost nodes.
  double interpolate(int c, double x) const noexcept;
  double interpolate(int c, double x, double y) const noexcept;
  double interpolate(int c, std::span<const double> x) const;

  double sup_norm() const noexcept;
  void scale(double factor) noexcept;

 private:
  int m_ = 1;
  int G_ = 0;
  int cells_ = 1;
  std::size_t n_ = 0;
  std::vector<double> v_;
};

/// Index of the lower interpolation node and the (possibly extrapolating) fraction.
inline void grid_locate(double x, int G, int& i, double& frac) noexcept {
  const double u = x * G - 0.5;
  int k = static_cast<int>(u >= 0.0 ? u : u - 1.0);
  if (k < 0) k = 0;
  if (k > G - 2) k = G - 2;
  i = k;
  frac = u - k;
}

}  // namespace cfstat
