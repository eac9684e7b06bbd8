#pragma once

// Flat key=value run configuration shared by every subcommand.

#include <cstddef>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "gibbslab/limit_harness.hpp"
#include "gibbslab/trotter_kernels.hpp"

namespace gibbslab::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ConfigKey {
  std::string name;
  std::string fallback;
  std::string help;
};

/// Every accepted key with its default, in echo order.
const std::vector<ConfigKey>& config_keys();

enum class Format { json, csv, both };

struct RunConfig {
  SweepConfig sweep;
  TrotterConfig trotter;
  double smooth_amplitude = 0.0;
  double smooth_width = 1.0;
  Format format = Format::both;
  int verbosity = 1;
  /// Resolved key -> value text, exactly as typed or defaulted.
  std::map<std::string, std::string> values;

  bool wants_json() const { return format != Format::csv; }
  bool wants_csv() const { return format != Format::json; }
  nlohmann::json echo() const;
};

/// "key = value" lines; '#' starts a comment. Throws ConfigError on unknown
/// keys, malformed lines or an unreadable file.
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

/// Defaults, then `file`, then `overrides`; every value is parsed and the
/// result validated. Throws ConfigError.
RunConfig resolve_config(const std::map<std::string, std::string>& file,
                         const std::map<std::string, std::string>& overrides);

/// Flag, then GIBBSLAB_OUTPUT_DIR, then the working directory.
std::filesystem::path output_directory(const std::string& flag);

}  // namespace gibbslab::cli
