#include "cfstat/summation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cfstat {

void KahanSum::add(double x) noexcept {
  const double t = sum_ + x;
  if (std::fabs(sum_) >= std::fabs(x)) {
    comp_ += (sum_ - t) + x;
  } else {
    comp_ += (x - t) + sum_;
  }
  sum_ = t;
}

KahanSum& KahanSum::operator+=(const KahanSum& other) noexcept {
  add(other.sum_);
  add(other.comp_);
  return *this;
}

double chunked_sum(std::span<const double> xs, std::size_t chunk) {
  if (chunk == 0) chunk = 1;
  KahanSum total;
  for (std::size_t lo = 0; lo < xs.size(); lo += chunk) {
    KahanSum part;
    const std::size_t hi = std::min(xs.size(), lo + chunk);
    for (std::size_t k = lo; k < hi; ++k) part.add(xs[k]);
    total += part;
  }
  return total.value();
}

void LogSumExp::add(double log_term) noexcept {
  if (std::isinf(log_term) && log_term < 0) return;
  if (empty_) {
    max_ = log_term;
    scaled_ = KahanSum{};
    scaled_.add(1.0);
    empty_ = false;
    return;
  }
  if (log_term > max_) {
    // Rescale the running sum to the new maximum.
    const double factor = std::exp(max_ - log_term);
    const double old = scaled_.value();
    scaled_ = KahanSum{};
    scaled_.add(old * factor);
    scaled_.add(1.0);
    max_ = log_term;
  } else {
    scaled_.add(std::exp(log_term - max_));
  }
}

double LogSumExp::value() const noexcept {
  if (empty_) return -std::numeric_limits<double>::infinity();
  return max_ + std::log(scaled_.value());
}

}  // namespace cfstat
