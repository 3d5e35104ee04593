#pragma once

// Command-line front end over the library: path certification, density
// computation with either solver, Monte Carlo validation, and parameter
// sweeps. All I/O goes through the supplied streams so the commands are
// testable in-process.

#include <iosfwd>

namespace fpd {

/// Parse argv and run one of the verbs certify | fpd | validate | sweep.
/// Exit codes: 0 success, 2 certification rejection, 3 configuration error,
/// 4 numerical or oracle failure.
int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err);

}  // namespace fpd
