#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>

#include "cavity/config.hpp"

namespace cavity {

inline constexpr const char* kToolVersion = "1.0.0";

// Exit codes of run() and summarize().
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitNumerical = 2;

struct RunOptions {
    std::string config_path;
    std::optional<std::string> output;  ///< overrides the config's output directory
    bool verbose = false;
    std::size_t threads = 0;            ///< 0 = available parallelism
};

/// Executes the configured tasks in order and writes the artifacts plus manifest.json.
/// Failures write error.json (when the output directory is known) and return 1 or 2.
int run(const RunOptions& opts, std::ostream& out, std::ostream& err);

/// Runs an already parsed configuration into `dir`; throws on failure.
void execute(const RunConfig& cfg, const std::string& dir, bool verbose, std::ostream& log);

/// Human-readable digest of an artifact directory. Returns 1 if the manifest is missing.
int summarize(const std::string& dir, std::ostream& out, std::ostream& err);

}  // namespace cavity
