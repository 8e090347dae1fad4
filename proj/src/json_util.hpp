#pragma once

#include <json.hpp>

#include <cstdint>
#include <string>

#include "mvlm/types.hpp"

namespace mvlm::detail {

using json = nlohmann::json;

/// Parses JSON, converting the library's parse failure into ParseError with
/// the byte offset it reports.
inline json parse_json(const std::string& bytes, const std::string& context) {
  try {
    return json::parse(bytes);
  } catch (const json::parse_error& e) {
    throw ParseError(context + ": " + e.what(), static_cast<std::int64_t>(e.byte));
  }
}

inline const json& require(const json& obj, const char* key, const std::string& context) {
  if (!obj.is_object()) {
    throw ParseError(context + ": expected an object holding '" + key + "'");
  }
  const auto it = obj.find(key);
  if (it == obj.end()) {
    throw ParseError(context + ": missing field '" + key + "'");
  }
  return *it;
}

inline double as_number(const json& value, const std::string& context) {
  if (!value.is_number()) {
    throw ParseError(context + ": expected a number");
  }
  return value.get<double>();
}

inline std::int64_t as_integer(const json& value, const std::string& context) {
  if (!value.is_number_integer()) {
    throw ParseError(context + ": expected an integer");
  }
  return value.get<std::int64_t>();
}

}  // namespace mvlm::detail
