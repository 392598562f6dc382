#pragma once

#include <string>

#include <json.hpp>

namespace qmaflow {

/// Compact JSON with every floating-point number printed to 17 significant
/// digits. Object keys keep nlohmann's (sorted) order.
std::string dump17(const nlohmann::json& value);

/// FNV-1a 64-bit hash of a string, hex encoded.
std::string fnv1a_hex(const std::string& text);

}  // namespace qmaflow
