// cli.hpp - subcommand front end shared by the clogsim binary and tests.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace clogsim::cli {

enum ExitCode : int {
    kOk = 0,
    kInvalidConfig = 1,
    kVoidedTest = 2,      // validate: naive truncation rate too high
    kFailedTest = 3,      // validate: engines disagree
};

// Parses `args` (argv without the program name) and runs the subcommand.
// Reports go to `out`, diagnostics and per-row progress to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// "a:b" (inclusive) or a single integer. Throws std::invalid_argument.
std::vector<int> parse_range(const std::string& text);

}  // namespace clogsim::cli
