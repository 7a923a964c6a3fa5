#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace divkit {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kReportSchemaVersion = 1;

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int input_error = 2;
inline constexpr int cache_recovered = 3;
inline constexpr int usage = 64;
}  // namespace exit_code

/// Rounds every float to 6 significant digits; object keys are already sorted
/// by nlohmann::json.
nlohmann::json canonicalize(const nlohmann::json& j);
std::string dump_canonical(const nlohmann::json& j);

/// Entry point behind the `divkit` binary. `args` excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace divkit
