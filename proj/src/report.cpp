#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "divkit/cli.hpp"

namespace divkit {

nlohmann::json canonicalize(const nlohmann::json& j) {
  if (j.is_object()) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [k, v] : j.items()) out[k] = canonicalize(v);
    return out;
  }
  if (j.is_array()) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& v : j) out.push_back(canonicalize(v));
    return out;
  }
  if (j.is_number_float()) {
    const double x = j.get<double>();
    if (!std::isfinite(x)) return nullptr;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    const double rounded = std::strtod(buf, nullptr);
    return rounded == 0 ? 0.0 : rounded;  // no "-0.0"
  }
  return j;
}

std::string dump_canonical(const nlohmann::json& j) { return canonicalize(j).dump(2) + "\n"; }

}  // namespace divkit
