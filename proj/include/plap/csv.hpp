#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace plap {

class DiscreteFunction;
struct DistributionCurve;

/// Shortest round-trip text for a double, 17 significant digits.
std::string format_real(double x);

void write_text_file(const std::filesystem::path& path, std::string_view contents);

/// `node_index,value` CSV.
std::string format_function_csv(const DiscreteFunction& u);
/// Reads a `node_index,value` CSV (header optional, every node exactly once).
/// Throws ParseError with the offending line.
std::vector<double> parse_function_csv(std::string_view text, std::size_t num_nodes);

/// `k,measure` CSV.
std::string format_curve_csv(const DistributionCurve& curve);

} // namespace plap
