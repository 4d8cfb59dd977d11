#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace wearable::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitUsage = 2;

/// Runs one subcommand. `args` excludes the program name.
///
/// Subcommands: synth, ingest, cluster, select-k, evaluate, patterns, stats,
/// report. `--config FILE` splices `key = value` lines in as `--key=value`
/// ahead of the explicit flags, which therefore win. Outputs go to `--out`
/// via temp file + rename, with the resolved settings in `run.log`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wearable::cli
