#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace entrogas::cli {

enum ExitCode { Ok = 0, ArgumentError = 2, NumericalError = 3 };

// "min:max:count", inclusive, strictly monotone
std::vector<double> parse_grid(const std::string& spec);

// Runs one subcommand. args excludes the program name. Data goes to out, diagnostics to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace entrogas::cli
