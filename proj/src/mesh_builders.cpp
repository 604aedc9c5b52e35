#include "plap/error.hpp"
#include "plap/mesh.hpp"

#include <map>
#include <utility>

namespace plap {

Mesh build_interval_mesh(int n_cells, double length)
{
    if (n_cells < 2)
        throw DomainError("interval mesh needs at least 2 cells");
    if (!(length > 0.0) || !std::isfinite(length))
        throw DomainError("interval length must be positive");

    std::vector<Point> vertices;
    vertices.reserve(static_cast<std::size_t>(n_cells) + 1);
    for (int i = 0; i <= n_cells; ++i)
        vertices.push_back({length * static_cast<double>(i) / n_cells, 0.0, 0.0});
    std::vector<Index> cells;
    cells.reserve(2 * static_cast<std::size_t>(n_cells));
    for (Index i = 0; i < n_cells; ++i) {
        cells.push_back(i);
        cells.push_back(i + 1);
    }
    return Mesh(1, 1, std::move(vertices), std::move(cells), {0, n_cells}, false);
}

Mesh build_flat_torus_mesh(int nx, int ny, double lx, double ly)
{
    if (nx < 3 || ny < 3)
        throw DomainError("torus mesh needs at least 3 cells per direction");
    if (!(lx > 0.0) || !(ly > 0.0) || !std::isfinite(lx) || !std::isfinite(ly))
        throw DomainError("torus side lengths must be positive");

    auto node = [nx, ny](int i, int j) { return static_cast<Index>((j % ny) * nx + (i % nx)); };
    std::vector<Point> vertices;
    vertices.reserve(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny));
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            vertices.push_back({lx * i / nx, ly * j / ny, 0.0});

    std::vector<Index> cells;
    cells.reserve(6 * static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny));
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const Index v00 = node(i, j), v10 = node(i + 1, j), v01 = node(i, j + 1),
                        v11 = node(i + 1, j + 1);
            cells.insert(cells.end(), {v00, v10, v11, v00, v11, v01});
        }
    return Mesh(2, 2, std::move(vertices), std::move(cells), {}, true, {lx, ly, 0.0});
}

Mesh build_rectangle_mesh(int nx, int ny, double lx, double ly)
{
    if (nx < 2 || ny < 2)
        throw DomainError("rectangle mesh needs at least 2 cells per direction");
    if (!(lx > 0.0) || !(ly > 0.0) || !std::isfinite(lx) || !std::isfinite(ly))
        throw DomainError("rectangle side lengths must be positive");

    const int sx = nx + 1;
    auto node = [sx](int i, int j) { return static_cast<Index>(j * sx + i); };
    std::vector<Point> vertices;
    std::vector<Index> boundary;
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i) {
            vertices.push_back({lx * i / nx, ly * j / ny, 0.0});
            if (i == 0 || j == 0 || i == nx || j == ny)
                boundary.push_back(node(i, j));
        }
    std::vector<Index> cells;
    cells.reserve(6 * static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny));
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const Index v00 = node(i, j), v10 = node(i + 1, j), v01 = node(i, j + 1),
                        v11 = node(i + 1, j + 1);
            cells.insert(cells.end(), {v00, v10, v11, v00, v11, v01});
        }
    return Mesh(2, 2, std::move(vertices), std::move(cells), std::move(boundary), false);
}

Mesh build_triangulated_sphere(int subdivisions, double radius)
{
    if (subdivisions < 0 || subdivisions > kMaxSphereSubdivisions)
        throw DomainError("sphere subdivisions must lie in [0, " +
                          std::to_string(kMaxSphereSubdivisions) + "]");
    if (!(radius > 0.0) || !std::isfinite(radius))
        throw DomainError("sphere radius must be positive");

    const double phi = 0.5 * (1.0 + std::sqrt(5.0));
    std::vector<Point> vertices = {
        {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
        {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
        {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1},
    };
    std::vector<Index> cells = {
        0, 11, 5,  0, 5,  1, 0, 1, 7, 0, 7,  10, 0, 10, 11,
        1, 5,  9,  5, 11, 4, 11, 10, 2, 10, 7, 6, 7, 1, 8,
        3, 9,  4,  3, 4,  2, 3, 2, 6, 3, 6,  8, 3, 8,  9,
        4, 9,  5,  2, 4,  11, 6, 2, 10, 8, 6, 7, 9, 8, 1,
    };
    auto project = [radius](Point x) {
        const double n = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
        return Point{radius * x[0] / n, radius * x[1] / n, radius * x[2] / n};
    };
    for (Point& x : vertices)
        x = project(x);

    for (int level = 0; level < subdivisions; ++level) {
        std::map<std::pair<Index, Index>, Index> midpoints;
        auto midpoint = [&](Index a, Index b) {
            const auto key = std::minmax(a, b);
            const auto it = midpoints.find(key);
            if (it != midpoints.end())
                return it->second;
            const Point& xa = vertices[static_cast<std::size_t>(a)];
            const Point& xb = vertices[static_cast<std::size_t>(b)];
            vertices.push_back(project({0.5 * (xa[0] + xb[0]), 0.5 * (xa[1] + xb[1]),
                                        0.5 * (xa[2] + xb[2])}));
            const auto idx = static_cast<Index>(vertices.size() - 1);
            midpoints.emplace(key, idx);
            return idx;
        };
        std::vector<Index> refined;
        refined.reserve(cells.size() * 4);
        for (std::size_t c = 0; c < cells.size(); c += 3) {
            const Index a = cells[c], b = cells[c + 1], d = cells[c + 2];
            const Index ab = midpoint(a, b), bd = midpoint(b, d), da = midpoint(d, a);
            refined.insert(refined.end(), {a, ab, da, b, bd, ab, d, da, bd, ab, bd, da});
        }
        cells = std::move(refined);
    }
    return Mesh(2, 3, std::move(vertices), std::move(cells), {}, true);
}

} // namespace plap
