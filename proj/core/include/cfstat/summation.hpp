#pragma once

#include <cstddef>
#include <span>

namespace cfstat {

/// Neumaier-compensated accumulator.
class KahanSum {
 public:
  void add(double x) noexcept;
  KahanSum& operator+=(double x) noexcept {
    add(x);
    return *this;
  }
  KahanSum& operator+=(const KahanSum& other) noexcept;
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Compensated sum over fixed-size chunks combined left to right; the result
/// depends only on the data and the chunk size.
double chunked_sum(std::span<const double> xs, std::size_t chunk = 4096);

/// Streaming log-sum-exp: log(sum exp(a_k)) without overflow.
class LogSumExp {
 public:
  void add(double log_term) noexcept;
  double value() const noexcept;
  bool empty() const noexcept { return empty_; }

 private:
  double max_ = 0.0;
  KahanSum scaled_;
  bool empty_ = true;
};

}  // namespace cfstat
