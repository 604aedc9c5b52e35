#include "plap/cli/manifest.hpp"

#include "plap/csv.hpp"
#include "plap/error.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <array>
#include <memory>

namespace plap::cli {

std::string sha256_hex(std::string_view data)
{
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int length = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), digest.data(), &length) != 1)
        throw Error("SHA-256 computation failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * length);
    for (unsigned int i = 0; i < length; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xF];
    }
    return out;
}

std::string format_manifest(const ManifestInput& input)
{
    nlohmann::ordered_json m;
    m["command"] = input.command;
    m["seed"] = input.seed;
    m["config"] = input.config_json.empty() ? nlohmann::json() : nlohmann::json::parse(input.config_json);
    auto artifacts = nlohmann::ordered_json::array();
    for (const auto& [name, contents] : input.artifacts)
        artifacts.push_back({{"name", name}, {"bytes", contents.size()}, {"sha256", sha256_hex(contents)}});
    m["artifacts"] = std::move(artifacts);
    m["exit_code"] = input.exit_code;
    if (input.error)
        m["error"] = *input.error;
    return m.dump(2) + "\n";
}

void write_run(const std::filesystem::path& dir, const ManifestInput& input)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw Error("cannot create output directory '" + dir.string() + "': " + ec.message());
    for (const auto& [name, contents] : input.artifacts)
        write_text_file(dir / name, contents);
    write_text_file(dir / "manifest.json", format_manifest(input));
}

} // namespace plap::cli
