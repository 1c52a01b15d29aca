#ifndef ACLDQN_TOOLS_CLI_HPP_
#define ACLDQN_TOOLS_CLI_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace acldqn::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// Entry point for every subcommand. Reads interactive input from `in`
// (chat only); results go to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err);

// "1..5" or "1,2,7". Throws std::invalid_argument on malformed input.
std::vector<std::uint64_t> parse_seeds(const std::string& text);

}  // namespace acldqn::cli

#endif  // ACLDQN_TOOLS_CLI_HPP_
