#pragma once
// Command-line front end. Subcommands: gen-bench, search, report.
// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

#include <ostream>
#include <string>
#include <vector>

namespace weaknas::cli {

inline constexpr const char* kResultsSchema = "weaknas-results/1";

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
/// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace weaknas::cli
