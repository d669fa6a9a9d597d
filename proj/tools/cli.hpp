#pragma once

#include <ostream>

namespace heterovol::cli {

/// Runs one subcommand (simulate, curves, analyze, calibrate, selfcheck).
/// Returns 0 on success, 1 for rejected input, 2 for a numerical failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace heterovol::cli
