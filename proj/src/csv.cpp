#include "plap/csv.hpp"

#include "plap/error.hpp"
#include "plap/fields.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace plap {

std::string format_real(double x)
{
    char buf[40];
    const int n = std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf, static_cast<std::size_t>(n));
}

void write_text_file(const std::filesystem::path& path, std::string_view contents)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error("cannot open '" + path.string() + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out)
        throw Error("failed writing '" + path.string() + "'");
}

std::string format_function_csv(const DiscreteFunction& u)
{
    std::ostringstream out;
    out << "node_index,value\n";
    for (std::size_t i = 0; i < u.size(); ++i)
        out << i << ',' << format_real(u[i]) << '\n';
    return out.str();
}

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

} // namespace

std::vector<double> parse_function_csv(std::string_view text, std::size_t num_nodes)
{
    std::vector<double> values(num_nodes, 0.0);
    std::vector<unsigned char> seen(num_nodes, 0);
    std::size_t line_no = 0, count = 0;
    while (!text.empty()) {
        const auto eol = text.find('\n');
        const std::string_view line = trim(text.substr(0, eol));
        text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
        ++line_no;
        if (line.empty() || line.front() == '#')
            continue;
        if (line_no == 1 && line == "node_index,value")
            continue;
        const auto comma = line.find(',');
        if (comma == std::string_view::npos)
            throw ParseError(line_no, "expected 'node_index,value'");
        const std::string idx_text(trim(line.substr(0, comma)));
        const std::string val_text(trim(line.substr(comma + 1)));
        std::size_t used = 0;
        long long idx = -1;
        double value = 0.0;
        try {
            idx = std::stoll(idx_text, &used);
            if (used != idx_text.size())
                throw std::invalid_argument("index");
            value = std::stod(val_text, &used);
            if (used != val_text.size())
                throw std::invalid_argument("value");
        } catch (const std::exception&) {
            throw ParseError(line_no, "malformed row '" + std::string(line) + "'");
        }
        if (idx < 0 || static_cast<std::size_t>(idx) >= num_nodes)
            throw ParseError(line_no, "node index " + idx_text + " out of range");
        if (!std::isfinite(value))
            throw ParseError(line_no, "non-finite value");
        if (seen[static_cast<std::size_t>(idx)])
            throw ParseError(line_no, "duplicate node index " + idx_text);
        seen[static_cast<std::size_t>(idx)] = 1;
        values[static_cast<std::size_t>(idx)] = value;
        ++count;
    }
    if (count != num_nodes)
        throw ParseError(line_no, "expected " + std::to_string(num_nodes) + " rows, found " + std::to_string(count));
    return values;
}

std::string format_curve_csv(const DistributionCurve& curve)
{
    std::ostringstream out;
    out << "k,measure\n";
    for (std::size_t i = 0; i < curve.thresholds.size(); ++i)
        out << format_real(curve.thresholds[i]) << ',' << format_real(curve.measures[i]) << '\n';
    return out.str();
}

} // namespace plap
