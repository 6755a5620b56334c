#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace xfer::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

/// Runs one subcommand (synth, augment, train-base, retrain, evaluate,
/// report). Results go to `out`; progress and diagnostics go to `err`.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace xfer::cli
