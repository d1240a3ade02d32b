#pragma once

#include <iosfwd>
#include <string>

#include "eet/config.hpp"

namespace eet::cli {

enum ExitCode : int { Success = 0, ConfigError = 1, NumericError = 2, NotConverged = 3 };

struct Outcome {
  int exit_code = Success;
  std::string summary_line;
};

/// Runs a validated config, writes every output file under cfg.output_dir.
/// Throws on config or numerical errors.
Outcome run(const config::RunConfig& cfg);

/// Full command-line entry point; never throws.
int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace eet::cli
