#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cfstat/cfmaps.hpp"

namespace cfstat {

/// Distinct digit labels j_1..j_d whose occurrences are counted.
class TargetSet {
 public:
  TargetSet() = default;
  TargetSet(const MapDescriptor& map, std::vector<DigitLabel> labels);

  /// "1,2" for Gauss/Brun, "a:b,a:b" for Jacobi-Perron.
  static TargetSet parse(const MapDescriptor& map, const std::string& text);

  std::size_t size() const noexcept { return labels_.size(); }
  const std::vector<DigitLabel>& labels() const noexcept { return labels_; }
  const DigitLabel& operator[](std::size_t k) const { return labels_[k]; }

  /// Index of the label among the targets, or -1.
  int index_of(const DigitLabel& label) const noexcept;
  bool contains(const Digit& d) const noexcept { return index_of(d.label()) >= 0; }

  /// Largest b appearing in any label.
  std::int64_t max_digit() const noexcept;

  std::string to_string() const;

 private:
  std::vector<DigitLabel> labels_;
};

/// Entry k counts the occurrences of label k.
std::vector<std::int64_t> count_digits(std::span<const Digit> digits, const TargetSet& targets);
void count_digits_into(std::span<const Digit> digits, const TargetSet& targets, std::span<std::int32_t> out);

}  // namespace cfstat
