#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "viab/config.hpp"

namespace viab {

enum ExitCode : int {
    kExitPass = 0,
    kExitFail = 1,
    kExitConfig = 2,
    kExitNumerical = 3,
    kExitReplayMismatch = 4,
};

struct RunResult {
    int exit_code = kExitPass;
    std::string kind;
    std::uint64_t seed = 0;
    std::string stem;  ///< <kind>_<seed>
    std::map<std::string, std::string> artifacts;  ///< file name -> content
    std::string summary;
};

/// Runs the experiment described by cfg. Errors surface as exceptions.
RunResult run_experiment(const ExperimentConfig& cfg);

/// run_experiment with errors mapped to exit codes; the message names the
/// failing module and node/step.
RunResult run_checked(const ExperimentConfig& cfg);

void write_artifacts(const RunResult& result, const std::string& directory);

struct ReplayResult {
    int exit_code = kExitPass;
    std::string message;
    int checked = 0;
};

/// Re-runs every stored config (<kind>_<seed>.ini) found in `path` (a
/// directory or a single .ini) and requires byte-identical CSV artifacts.
ReplayResult replay(const std::string& path);

/// First differing cell of two CSV texts, or an empty string when equal.
std::string first_csv_difference(const std::string& stored, const std::string& fresh);

}  // namespace viab
