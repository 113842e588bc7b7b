#pragma once

#include <iosfwd>

namespace slotcnn::cli {

enum ExitCode : int { kSuccess = 0, kUsageError = 1, kDataError = 2, kNumericError = 3 };

/// Runs one command. Reports go to the declared output paths; progress and
/// the human-readable tables go to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace slotcnn::cli
