#pragma once

#include <nlohmann/json.hpp>
#include <string>

namespace cfstat::cli {

inline constexpr const char* kSchemaVersion = "1";

/// Serializes with every floating value at 17 significant digits; non-finite
/// values become null. Object keys keep nlohmann's sorted order.
std::string dump_json(const nlohmann::json& j, int indent = 2);

/// "%.17g", or "nan"/"inf"/"-inf".
std::string format_double(double v);

}  // namespace cfstat::cli
