#pragma once
// JSON has no infinities; they travel as the strings "inf" / "-inf".
#include <cmath>
#include <limits>
#include <string>

#include <json.hpp>

namespace vp::detail {

inline nlohmann::json real_to_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline double real_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  return j.get<double>();
}

}  // namespace vp::detail
