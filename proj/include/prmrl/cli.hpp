#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "prmrl/navigation.hpp"

namespace prmrl::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kUsage = 2,         // bad arguments, config or input files
  kPrecondition = 3,  // start or goal in collision
  kNavFailed = 4,     // navigation ended in collision or timeout
  kInternal = 5,
};

/// Invalid configuration key or value.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Full key tree with every default filled in.
nlohmann::json default_config();

/// Merges a user document over the defaults. Unknown keys are rejected.
nlohmann::json merge_config(const nlohmann::json& user);

/// Sets a dotted key (`noise.sigma_lidar=0.3`). The value is parsed as JSON
/// when possible, otherwise taken as a string. The key must already exist.
void apply_override(nlohmann::json& config, const std::string& assignment);

/// Loads the map named by `map.world` or by `map.image` + `map.meta`.
OccupancyGrid map_from_config(const nlohmann::json& config);

/// Translates a validated config into an experiment description.
Experiment experiment_from_config(const nlohmann::json& config);

/// Writes `content` to a temporary sibling, then renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Entry point used by the executable and by tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace prmrl::cli
