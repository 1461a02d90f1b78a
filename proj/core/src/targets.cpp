#include "cfstat/targets.hpp"

#include <algorithm>
#include <sstream>

namespace cfstat {

TargetSet::TargetSet(const MapDescriptor& map, std::vector<DigitLabel> labels) : labels_(std::move(labels)) {
  if (labels_.empty()) throw ValidationError("target set must not be empty");
  for (std::size_t k = 0; k < labels_.size(); ++k) {
    const auto& l = labels_[k];
    if (l.b < 1) throw ValidationError("target digit must be >= 1");
    if (map.algorithm() == Algorithm::jacobi_perron) {
      if (l.a < 0 || l.a > l.b) throw ValidationError("jp target requires 0 <= a <= b");
    } else if (l.a != -1) {
      throw ValidationError("pair targets are only valid for jp2");
    }
    for (std::size_t i = 0; i < k; ++i) {
      if (labels_[i] == l) throw ValidationError("target digits must be distinct");
    }
  }
}

TargetSet TargetSet::parse(const MapDescriptor& map, const std::string& text) {
  std::vector<DigitLabel> labels;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(std::remove_if(item.begin(), item.end(), [](char c) { return c == ' ' || c == '(' || c == ')'; }),
               item.end());
    if (item.empty()) continue;
    try {
      const auto colon = item.find(':');
      if (map.algorithm() == Algorithm::jacobi_perron) {
        if (colon == std::string::npos) throw ValidationError("jp targets are written a:b");
        labels.push_back(DigitLabel{std::stoll(item.substr(0, colon)), std::stoll(item.substr(colon + 1))});
      } else {
        if (colon != std::string::npos) throw ValidationError("pair targets are only valid for jp2");
        labels.push_back(DigitLabel{-1, std::stoll(item)});
      }
    } catch (const std::logic_error& e) {
      if (dynamic_cast<const ValidationError*>(&e)) throw;
      throw ValidationError("cannot parse target '" + item + "'");
    }
  }
  return TargetSet(map, std::move(labels));
}

int TargetSet::index_of(const DigitLabel& label) const noexcept {
  for (std::size_t k = 0; k < labels_.size(); ++k) {
    if (labels_[k] == label) return static_cast<int>(k);
  }
  return -1;
}

std::int64_t TargetSet::max_digit() const noexcept {
  std::int64_t m = 0;
  for (const auto& l : labels_) m = std::max(m, l.b);
  return m;
}

std::string TargetSet::to_string() const {
  std::string s;
  for (std::size_t k = 0; k < labels_.size(); ++k) {
    if (k) s += ",";
    s += cfstat::to_string(labels_[k]);
  }
  return s;
}

std::vector<std::int64_t> count_digits(std::span<const Digit> digits, const TargetSet& targets) {
  std::vector<std::int64_t> out(targets.size(), 0);
  for (const auto& d : digits) {
    const int k = targets.index_of(d.label());
    if (k >= 0) ++out[static_cast<std::size_t>(k)];
  }
  return out;
}

void count_digits_into(std::span<const Digit> digits, const TargetSet& targets, std::span<std::int32_t> out) {
  std::fill(out.begin(), out.end(), 0);
  for (const auto& d : digits) {
    const int k = targets.index_of(d.label());
    if (k >= 0) ++out[static_cast<std::size_t>(k)];
  }
}

}  // namespace cfstat
