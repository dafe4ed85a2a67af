#pragma once

#include <iostream>
#include <string>
#include <vector>

namespace qk {

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitNumerical = 2;

/// Runs one `qkernel` invocation. `args` excludes the program name.
/// Subcommands: gen-data, kernel, spectrum, gd, svm, tune-gamma, min-gd,
/// experiment. With --json-errors, failures are reported on `err` as a
/// single JSON object.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out = std::cout,
                 std::ostream& err = std::cerr);
int cli_dispatch(int argc, const char* const* argv, std::ostream& out = std::cout,
                 std::ostream& err = std::cerr);

}  // namespace qk
