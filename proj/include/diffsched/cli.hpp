#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace diffsched::cli {

/// Runs one command line (args excludes the program name). Exit codes:
/// 0 success, 1 runtime failure, 2 usage error.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// `a..b` (inclusive), a comma list, or a single value.
std::vector<std::uint64_t> parse_seed_list(std::string_view text);

}  // namespace diffsched::cli
