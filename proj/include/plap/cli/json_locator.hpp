#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>

namespace plap::cli {

/// Maps the JSON pointer of every value in a document to the 1-based line on
/// which the value starts ("" is the root, "/solver/p", "/schedule/levels/0").
/// The scan is lenient: it assumes the document already parsed successfully.
std::map<std::string, std::size_t> locate_values(std::string_view text);

/// 1-based line of a byte offset.
std::size_t line_at(std::string_view text, std::size_t offset);

} // namespace plap::cli
