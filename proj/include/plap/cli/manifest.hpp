#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace plap::cli {

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

struct ManifestInput {
    std::string command;
    std::uint64_t seed = 0;
    std::string config_json; ///< canonical config; empty when the config did not parse
    std::map<std::string, std::string> artifacts; ///< file name -> contents
    int exit_code = 0;
    std::optional<std::string> error;
};

/// manifest.json text: config echo, artifacts sorted by name with byte count
/// and SHA-256, exit code and error message.
std::string format_manifest(const ManifestInput& input);

/// Writes every artifact, then manifest.json, into `dir` (created if needed).
void write_run(const std::filesystem::path& dir, const ManifestInput& input);

} // namespace plap::cli
