#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace riskalloc {

// Exit codes of the command-line front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitSpec = 2;
inline constexpr int kExitDomain = 3;
inline constexpr int kExitVerification = 4;

// Runs one subcommand (measure, allocate, verify, bounded, counterexample).
// `args` excludes the program name. JSON goes to `out`, diagnostics to `err`.
int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace riskalloc
