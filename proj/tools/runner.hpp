#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"

namespace hyperlq::cli {

enum ExitCode { kExitOk = 0, kExitValidation = 2, kExitNumeric = 3 };

struct RunOptions {
  std::string subcommand = "run";  // run | observability | bounds | decay | null-control | turnpike | validate
  std::string config_path;
  std::string output_dir;  // overrides the config when nonempty
  std::optional<std::uint64_t> seed;
  int threads = 0;  // 0: hardware concurrency, capped by HYPERLQ_THREADS
  bool quiet = false;
};

/// Worker count after applying --threads and the HYPERLQ_THREADS cap.
int ResolveThreads(int requested);

/// Executes one invocation and returns the process exit code. Diagnostics go
/// to stderr, progress to stdout unless quiet.
int Execute(const RunOptions& options);

/// Command line front end: parses argv with CLI11 and calls Execute.
int Main(int argc, char** argv);

}  // namespace hyperlq::cli
