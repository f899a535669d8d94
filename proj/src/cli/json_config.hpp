#pragma once

#include <string>
#include <vector>

namespace weaknas::cli {

/// Replaces `--config FILE` in a subcommand's arguments by the flags the
/// file holds. The file is a flat JSON object keyed by long option names
/// without dashes; arrays repeat the option, `true` sets a flag and `false`
/// leaves it off. Flags also given on the command line keep their command
/// line value. Throws std::invalid_argument on an unreadable or malformed file.
std::vector<std::string> expand_config(const std::vector<std::string>& args);

}  // namespace weaknas::cli
