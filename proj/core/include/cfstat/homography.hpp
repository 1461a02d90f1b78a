#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "cfstat/errors.hpp"

namespace cfstat {

namespace detail {

template <class Int>
Int checked_add(const Int& a, const Int& b) {
  if constexpr (std::is_integral_v<Int>) {
    Int r{};
    if (__builtin_add_overflow(a, b, &r)) throw ArithmeticOverflow("integer overflow in homography arithmetic");
    return r;
  } else {
    return a + b;
  }
}

template <class Int>
Int checked_mul(const Int& a, const Int& b) {
  if constexpr (std::is_integral_v<Int>) {
    Int r{};
    if (__builtin_mul_overflow(a, b, &r)) throw ArithmeticOverflow("integer overflow in homography arithmetic");
    return r;
  } else {
    return a * b;
  }
}

template <class Int>
double to_double(const Int& v) {
  if constexpr (std::is_arithmetic_v<Int>) {
    return static_cast<double>(v);
  } else {
    return v.template convert_to<double>();
  }
}

}  // namespace detail

/// Integer (m+1)x(m+1) matrix acting projectively on R^m:
/// y_k = (row_k . (x,1)) / (row_{m+1} . (x,1)).
///
/// Composition is the matrix product, so compose(h1, h2) acts as h1 o h2.
/// Arithmetic on builtin integer types is overflow-checked; instantiate with a
/// multiprecision type (e.g. boost::multiprecision::cpp_int) for unbounded
/// entries.
template <class Int>
class BasicHomography {
 public:
  BasicHomography() = default;

  static BasicHomography identity(int dimension) {
    BasicHomography h(dimension);
    for (int i = 0; i <= dimension; ++i) h.at(i, i) = Int(1);
    return h;
  }

  /// Rows given in row-major order; size must be (m+1)^2.
  static BasicHomography from_rows(int dimension, std::vector<Int> entries) {
    const auto n = static_cast<std::size_t>(dimension + 1);
    if (dimension < 1 || entries.size() != n * n) {
      throw ValidationError("homography: expected (m+1)^2 entries");
    }
    BasicHomography h(dimension);
    h.entries_ = std::move(entries);
    return h;
  }

  int dimension() const noexcept { return dim_; }
  int order() const noexcept { return dim_ + 1; }

  const Int& at(int r, int c) const { return entries_[static_cast<std::size_t>(r * order() + c)]; }
  Int& at(int r, int c) { return entries_[static_cast<std::size_t>(r * order() + c)]; }

  const std::vector<Int>& entries() const noexcept { return entries_; }

  friend bool operator==(const BasicHomography&, const BasicHomography&) = default;

  /// Matrix product; acts as this o rhs.
  BasicHomography operator*(const BasicHomography& rhs) const {
    if (rhs.dim_ != dim_) throw ValidationError("homography: dimension mismatch in compose");
    BasicHomography out(dim_);
    const int n = order();
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        Int acc(0);
        for (int k = 0; k < n; ++k) acc = detail::checked_add(acc, detail::checked_mul(at(r, k), rhs.at(k, c)));
        out.at(r, c) = acc;
      }
    }
    return out;
  }

  /// Exact projective image of a homogeneous integer vector (x numerators, denominator).
  std::vector<Int> apply_projective(std::span<const Int> homogeneous) const {
    const int n = order();
    if (static_cast<int>(homogeneous.size()) != n) throw ValidationError("homography: bad homogeneous vector");
    std::vector<Int> out(static_cast<std::size_t>(n), Int(0));
    for (int r = 0; r < n; ++r) {
      Int acc(0);
      for (int k = 0; k < n; ++k) acc = detail::checked_add(acc, detail::checked_mul(at(r, k), homogeneous[k]));
      out[static_cast<std::size_t>(r)] = acc;
    }
    return out;
  }

  /// Denominator row evaluated at (x, 1).
  double denominator_at(std::span<const double> x) const {
    const int m = dim_;
    double acc = detail::to_double(at(m, m));
    for (int k = 0; k < m; ++k) acc += detail::to_double(at(m, k)) * x[k];
    return acc;
  }

  std::vector<double> apply(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dim_) throw ValidationError("homography: point dimension mismatch");
    const double den = denominator_at(x);
    if (!(den > 0.0)) throw DomainError("homography: non-positive denominator, point outside branch domain");
    std::vector<double> y(static_cast<std::size_t>(dim_));
    for (int r = 0; r < dim_; ++r) {
      double acc = detail::to_double(at(r, dim_));
      for (int k = 0; k < dim_; ++k) acc += detail::to_double(at(r, k)) * x[k];
      y[static_cast<std::size_t>(r)] = acc / den;
    }
    return y;
  }

  /// Determinant by fraction-free (Bareiss) elimination.
  Int determinant() const {
    const int n = order();
    std::vector<Int> a = entries_;
    auto A = [&](int r, int c) -> Int& { return a[static_cast<std::size_t>(r * n + c)]; };
    Int sign(1);
    Int prev(1);
    for (int k = 0; k < n - 1; ++k) {
      if (A(k, k) == Int(0)) {
        int swap_row = -1;
        for (int r = k + 1; r < n; ++r) {
          if (A(r, k) != Int(0)) {
            swap_row = r;
            break;
          }
        }
        if (swap_row < 0) return Int(0);
        for (int c = 0; c < n; ++c) std::swap(A(k, c), A(swap_row, c));
        sign = -sign;
      }
      for (int r = k + 1; r < n; ++r) {
        for (int c = k + 1; c < n; ++c) {
          A(r, c) = detail::checked_add(detail::checked_mul(A(r, c), A(k, k)),
                                       Int(-detail::checked_mul(A(r, k), A(k, c)))) /
                    prev;
        }
      }
      prev = A(k, k);
    }
    return sign * A(n - 1, n - 1);
  }

  bool is_unimodular() const {
    const Int d = determinant();
    return d == Int(1) || d == Int(-1);
  }

  /// log|J_h(x)| = log|det| - (m+1) log(den(x)).
  double log_jacobian(std::span<const double> x) const {
    const double den = denominator_at(x);
    if (!(den > 0.0)) throw DomainError("log_jacobian: non-positive denominator, point outside branch domain");
    const double det = std::fabs(detail::to_double(determinant()));
    return std::log(det) - static_cast<double>(dim_ + 1) * std::log(den);
  }

  template <class Other>
  BasicHomography<Other> cast() const {
    std::vector<Other> e;
    e.reserve(entries_.size());
    for (const auto& v : entries_) e.emplace_back(v);
    return BasicHomography<Other>::from_rows(dim_, std::move(e));
  }

 private:
  explicit BasicHomography(int dimension)
      : dim_(dimension), entries_(static_cast<std::size_t>((dimension + 1) * (dimension + 1)), Int(0)) {}

  int dim_ = 0;
  std::vector<Int> entries_;
};

using Homography = BasicHomography<std::int64_t>;

template <class Int>
BasicHomography<Int> compose(const BasicHomography<Int>& h1, const BasicHomography<Int>& h2) {
  return h1 * h2;
}

std::string to_string(const Homography& h);

}  // namespace cfstat
