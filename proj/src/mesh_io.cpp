#include "plap/csv.hpp"
#include "plap/error.hpp"
#include "plap/mesh.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace plap {

namespace {

struct Line {
    std::size_t number;
    std::vector<std::string_view> tokens;
};

std::vector<std::string_view> split_ws(std::string_view s)
{
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i])))
            ++i;
        std::size_t j = i;
        while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j])))
            ++j;
        if (j > i)
            out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

std::vector<Line> tokenize(std::string_view text)
{
    std::vector<Line> lines;
    std::size_t number = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos)
            end = text.size();
        ++number;
        auto tokens = split_ws(text.substr(start, end - start));
        if (!tokens.empty())
            lines.push_back({number, std::move(tokens)});
        if (end == text.size())
            break;
        start = end + 1;
    }
    return lines;
}

double to_real(std::string_view tok, std::size_t line)
{
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size() || !std::isfinite(v))
        throw ParseError(line, "invalid number '" + std::string(tok) + "'");
    return v;
}

long long to_integer(std::string_view tok, std::size_t line)
{
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size())
        throw ParseError(line, "invalid integer '" + std::string(tok) + "'");
    return v;
}

int header_field(std::string_view tok, std::string_view key, std::size_t line)
{
    if (tok.substr(0, key.size()) != key)
        throw ParseError(line, "malformed header: expected '" + std::string(key) + "<value>'");
    return static_cast<int>(to_integer(tok.substr(key.size()), line));
}

} // namespace

std::string format_mesh(const Mesh& mesh)
{
    std::ostringstream out;
    out << "PLAPMESH v1 dim=" << mesh.dimension() << " closed=" << (mesh.closed() ? 1 : 0) << '\n';
    out << mesh.num_vertices() << ' ' << mesh.num_cells() << '\n';
    for (const Point& x : mesh.vertices()) {
        for (int k = 0; k < mesh.embedding_dimension(); ++k)
            out << (k ? " " : "") << format_real(x[k]);
        out << '\n';
    }
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
        const auto nodes = mesh.cell(c);
        for (std::size_t j = 0; j < nodes.size(); ++j)
            out << (j ? " " : "") << nodes[j];
        out << '\n';
    }
    if (!mesh.boundary_nodes().empty()) {
        out << "boundary";
        for (Index b : mesh.boundary_nodes())
            out << ' ' << b;
        out << '\n';
    }
    if (mesh.periodic()) {
        out << "period";
        for (int k = 0; k < mesh.embedding_dimension(); ++k)
            out << ' ' << format_real(mesh.period()[k]);
        out << '\n';
    }
    return out.str();
}

Mesh parse_mesh(std::string_view text)
{
    const auto lines = tokenize(text);
    if (lines.empty())
        throw ParseError(1, "missing header");

    const Line& header = lines[0];
    if (header.tokens.size() != 4 || header.tokens[0] != "PLAPMESH" || header.tokens[1] != "v1")
        throw ParseError(header.number, "malformed header: expected 'PLAPMESH v1 dim=<N> closed=<0|1>'");
    const int dim = header_field(header.tokens[2], "dim=", header.number);
    const int closed = header_field(header.tokens[3], "closed=", header.number);
    if (dim < 1 || dim > 2)
        throw ParseError(header.number, "dim must be 1 or 2");
    if (closed != 0 && closed != 1)
        throw ParseError(header.number, "closed must be 0 or 1");

    if (lines.size() < 2 || lines[1].tokens.size() != 2)
        throw ParseError(lines.size() < 2 ? header.number + 1 : lines[1].number,
                         "expected '<n_vertices> <n_cells>'");
    const long long nv = to_integer(lines[1].tokens[0], lines[1].number);
    const long long nc = to_integer(lines[1].tokens[1], lines[1].number);
    if (nv <= 0 || nc <= 0)
        throw ParseError(lines[1].number, "vertex and cell counts must be positive");
    if (lines.size() < static_cast<std::size_t>(2 + nv + nc))
        throw ParseError(lines.back().number, "file ends before all vertices and cells were read");

    std::vector<Point> vertices;
    vertices.reserve(static_cast<std::size_t>(nv));
    const std::size_t embed = lines[2].tokens.size();
    if (embed < static_cast<std::size_t>(dim) || embed > 3)
        throw ParseError(lines[2].number, "vertex must have between dim and 3 coordinates");
    for (long long i = 0; i < nv; ++i) {
        const Line& l = lines[static_cast<std::size_t>(2 + i)];
        if (l.tokens.size() != embed)
            throw ParseError(l.number, "inconsistent coordinate count");
        Point x{0.0, 0.0, 0.0};
        for (std::size_t k = 0; k < embed; ++k)
            x[k] = to_real(l.tokens[k], l.number);
        vertices.push_back(x);
    }

    const std::size_t first_cell = static_cast<std::size_t>(2 + nv);
    std::vector<Index> cells;
    cells.reserve(static_cast<std::size_t>(nc * (dim + 1)));
    for (long long c = 0; c < nc; ++c) {
        const Line& l = lines[first_cell + static_cast<std::size_t>(c)];
        if (l.tokens.size() != static_cast<std::size_t>(dim + 1))
            throw ParseError(l.number, "cell must list " + std::to_string(dim + 1) + " vertex indices");
        for (const auto tok : l.tokens) {
            const long long v = to_integer(tok, l.number);
            if (v < 0 || v >= nv)
                throw ParseError(l.number, "index out of range");
            cells.push_back(static_cast<Index>(v));
        }
    }

    std::vector<Index> boundary;
    Point period{0.0, 0.0, 0.0};
    for (std::size_t i = first_cell + static_cast<std::size_t>(nc); i < lines.size(); ++i) {
        const Line& l = lines[i];
        if (l.tokens[0] == "boundary") {
            for (std::size_t j = 1; j < l.tokens.size(); ++j) {
                const long long v = to_integer(l.tokens[j], l.number);
                if (v < 0 || v >= nv)
                    throw ParseError(l.number, "index out of range");
                boundary.push_back(static_cast<Index>(v));
            }
        } else if (l.tokens[0] == "period") {
            if (l.tokens.size() != embed + 1)
                throw ParseError(l.number, "period must list one value per coordinate");
            for (std::size_t k = 0; k < embed; ++k)
                period[k] = to_real(l.tokens[k + 1], l.number);
        } else {
            throw ParseError(l.number, "unexpected trailing content");
        }
    }

    try {
        return Mesh(dim, static_cast<int>(embed), std::move(vertices), std::move(cells),
                    std::move(boundary), closed == 1, period);
    } catch (const CellError& e) {
        throw ParseError(lines[first_cell + e.cell()].number, e.what());
    } catch (const MeshError& e) {
        throw ParseError(header.number, e.what());
    }
}

void save_mesh(const Mesh& mesh, const std::filesystem::path& path)
{
    write_text_file(path, format_mesh(mesh));
}

Mesh load_mesh(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open mesh file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_mesh(buf.str());
}

} // namespace plap
