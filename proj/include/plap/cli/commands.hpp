#pragma once

#include "plap/cli/config.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace plap::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitNumerical = 2;

inline constexpr std::array<std::string_view, 6> kCommands{"solve",   "entropy", "estimates",
                                                            "picone",  "compare", "convergence"};

struct CommandResult {
    int exit_code = kExitOk;
    std::map<std::string, std::string> artifacts; ///< file name -> contents
    std::string summary;                          ///< one line for the terminal
};

/// Runs one command on a parsed config. Config problems discovered while
/// building the mesh or data (and missing command-specific sections) throw
/// ParseError anchored at the relevant line; numerical failures are reported
/// through exit_code.
CommandResult execute(std::string_view command, const RunConfig& config);

struct RunOptions {
    std::string command;
    std::filesystem::path config_path;
    std::optional<std::filesystem::path> out_dir;
    std::optional<std::uint64_t> seed;
};

/// Loads the config, executes the command, writes the artifacts and the
/// manifest, and returns the process exit code.
int run(const RunOptions& options, std::ostream& out, std::ostream& err);

} // namespace plap::cli
