#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cli/config.hpp"
#include "json.hpp"
#include "vartherm/error.hpp"

namespace vartherm::cli {

enum ExitCode : int { kClean = 0, kIoError = 1, kLawViolation = 2, kIntegrationFailure = 3, kConfigError = 4 };

int exit_code_for(ErrorKind kind);

struct RunResult {
  int exit_code = kClean;
  std::string scenario;
  std::string summary;  // one line
  nlohmann::ordered_json report;
};

/// Loads, runs, diagnoses and exports one config. `out`/`report` override
/// the config's output block when non-empty. Never throws.
RunResult run_config(const std::string& path, const Overrides& ov, const std::string& out = "",
                     const std::string& report = "");

/// Re-ingests a trajectory CSV and diagnoses it against a lumped scenario.
RunResult check_trajectory_file(const std::string& csv_path, const std::string& config_path,
                                const std::string& report = "");

/// Entry point shared by the executable and the tests.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace vartherm::cli
