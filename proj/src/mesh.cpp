#include "plap/mesh.hpp"

#include "plap/error.hpp"

#include <algorithm>
#include <atomic>
#include <numeric>
#include <string>

namespace plap {

namespace {

std::atomic<std::uint64_t> g_next_mesh_id{1};

double dot3(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

    std::size_t find(std::size_t x)
    {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

private:
    std::vector<std::size_t> parent_;
};

} // namespace

Mesh::Mesh(int dimension,
           int embedding_dimension,
           std::vector<Point> vertices,
           std::vector<Index> cell_nodes,
           std::vector<Index> boundary_nodes,
           bool closed,
           Point period)
    : id_{g_next_mesh_id.fetch_add(1)}
    , dim_(dimension)
    , embed_dim_(embedding_dimension)
    , vertices_(std::move(vertices))
    , cell_nodes_(std::move(cell_nodes))
    , boundary_(std::move(boundary_nodes))
    , closed_(closed)
    , period_(period)
{
    if (dim_ < 1 || dim_ > 2)
        throw MeshError("mesh dimension must be 1 or 2, got " + std::to_string(dim_));
    if (embed_dim_ < dim_ || embed_dim_ > 3)
        throw MeshError("embedding dimension must lie in [" + std::to_string(dim_) + ", 3]");
    if (vertices_.empty())
        throw MeshError("mesh has no vertices");
    const auto npc = static_cast<std::size_t>(nodes_per_cell());
    if (cell_nodes_.empty() || cell_nodes_.size() % npc != 0)
        throw MeshError("cell list is empty or not a multiple of " + std::to_string(npc));
    for (double L : period_)
        if (!(L >= 0.0) || !std::isfinite(L))
            throw MeshError("period entries must be finite and nonnegative");

    const auto nv = static_cast<Index>(vertices_.size());
    for (std::size_t i = 0; i < cell_nodes_.size(); ++i) {
        const Index v = cell_nodes_[i];
        if (v < 0 || v >= nv)
            throw CellError(i / npc, "cell " + std::to_string(i / npc) + ": index out of range");
    }
    for (const Point& x : vertices_)
        for (double c : x)
            if (!std::isfinite(c))
                throw MeshError("non-finite vertex coordinate");

    std::sort(boundary_.begin(), boundary_.end());
    boundary_.erase(std::unique(boundary_.begin(), boundary_.end()), boundary_.end());
    on_boundary_.assign(vertices_.size(), 0);
    for (Index b : boundary_) {
        if (b < 0 || b >= nv)
            throw MeshError("boundary node index out of range");
        on_boundary_[static_cast<std::size_t>(b)] = 1;
    }
    if (closed_ != boundary_.empty())
        throw MeshError(closed_ ? "closed mesh must not list boundary nodes"
                                : "mesh with boundary must list boundary nodes");

    build_geometry();
    validate_connectivity();
}

bool Mesh::periodic() const noexcept
{
    return std::any_of(period_.begin(), period_.end(), [](double L) { return L > 0.0; });
}

Vec3 Mesh::displacement(Index a, Index b) const
{
    const Point& xa = vertices_[static_cast<std::size_t>(a)];
    const Point& xb = vertices_[static_cast<std::size_t>(b)];
    Vec3 d{xb[0] - xa[0], xb[1] - xa[1], xb[2] - xa[2]};
    for (int k = 0; k < 3; ++k)
        if (period_[k] > 0.0)
            d[k] -= period_[k] * std::round(d[k] / period_[k]);
    return d;
}

void Mesh::build_geometry()
{
    const std::size_t nc = cell_nodes_.size() / static_cast<std::size_t>(nodes_per_cell());
    const auto npc = static_cast<std::size_t>(nodes_per_cell());
    volumes_.assign(nc, 0.0);
    basis_grads_.assign(nc * npc, Vec3{0.0, 0.0, 0.0});
    lumped_mass_.assign(vertices_.size(), 0.0);

    CompensatedSum total;
    for (std::size_t c = 0; c < nc; ++c) {
        const auto nodes = cell(c);
        std::array<Vec3, 2> e{};
        double max_edge2 = 0.0;
        for (int j = 1; j <= dim_; ++j) {
            e[j - 1] = displacement(nodes[0], nodes[j]);
            max_edge2 = std::max(max_edge2, dot3(e[j - 1], e[j - 1]));
        }

        double volume = 0.0;
        if (dim_ == 1) {
            const double len2 = dot3(e[0], e[0]);
            volume = std::sqrt(len2);
            if (volume > 0.0) {
                Vec3 g1{e[0][0] / len2, e[0][1] / len2, e[0][2] / len2};
                basis_grads_[c * npc + 1] = g1;
                basis_grads_[c * npc + 0] = {-g1[0], -g1[1], -g1[2]};
            }
        } else {
            const double g11 = dot3(e[0], e[0]);
            const double g12 = dot3(e[0], e[1]);
            const double g22 = dot3(e[1], e[1]);
            const double det = g11 * g22 - g12 * g12;
            volume = det > 0.0 ? 0.5 * std::sqrt(det) : 0.0;
            if (det > 0.0) {
                // Columns of E G^{-1}.
                const double i11 = g22 / det, i12 = -g12 / det, i22 = g11 / det;
                Vec3 g1{}, g2{};
                for (int k = 0; k < 3; ++k) {
                    g1[k] = e[0][k] * i11 + e[1][k] * i12;
                    g2[k] = e[0][k] * i12 + e[1][k] * i22;
                }
                basis_grads_[c * npc + 1] = g1;
                basis_grads_[c * npc + 2] = g2;
                basis_grads_[c * npc + 0] = {-g1[0] - g2[0], -g1[1] - g2[1], -g1[2] - g2[2]};
            }
        }

        const double scale = std::pow(max_edge2, 0.5 * dim_);
        if (!(volume > 1e-12 * scale) || !std::isfinite(volume))
            throw CellError(c, "cell " + std::to_string(c) + " is degenerate");

        volumes_[c] = volume;
        total.add(volume);
        for (Index v : nodes)
            lumped_mass_[static_cast<std::size_t>(v)] += volume / static_cast<double>(npc);
    }
    total_volume_ = total.value();
    if (!(total_volume_ > 0.0) || !std::isfinite(total_volume_))
        throw MeshError("total volume must be finite and positive");
}

void Mesh::validate_connectivity() const
{
    DisjointSets sets(vertices_.size());
    std::vector<unsigned char> used(vertices_.size(), 0);
    for (std::size_t c = 0; c < num_cells(); ++c) {
        const auto nodes = cell(c);
        for (Index v : nodes)
            used[static_cast<std::size_t>(v)] = 1;
        for (std::size_t j = 1; j < nodes.size(); ++j)
            sets.unite(static_cast<std::size_t>(nodes[0]), static_cast<std::size_t>(nodes[j]));
    }
    for (std::size_t v = 0; v < vertices_.size(); ++v)
        if (!used[v])
            throw MeshError("vertex " + std::to_string(v) + " belongs to no cell");
    const std::size_t root = sets.find(0);
    for (std::size_t v = 1; v < vertices_.size(); ++v)
        if (sets.find(v) != root)
            throw MeshError("cell adjacency graph is not connected");
}

bool Mesh::same_geometry(const Mesh& other, double rel_tol) const
{
    if (dim_ != other.dim_ || embed_dim_ != other.embed_dim_ || closed_ != other.closed_)
        return false;
    if (cell_nodes_ != other.cell_nodes_ || boundary_ != other.boundary_ ||
        vertices_.size() != other.vertices_.size())
        return false;
    auto close = [rel_tol](double a, double b) {
        return std::abs(a - b) <= rel_tol * std::max({1.0, std::abs(a), std::abs(b)});
    };
    for (int k = 0; k < 3; ++k)
        if (!close(period_[k], other.period_[k]))
            return false;
    for (std::size_t i = 0; i < vertices_.size(); ++i)
        for (int k = 0; k < 3; ++k)
            if (!close(vertices_[i][k], other.vertices_[i][k]))
                return false;
    return true;
}

QuadratureRule midpoint_rule(int dimension)
{
    if (dimension == 1)
        return {{{0.5, 0.5, 0.0}}, {1.0}};
    if (dimension == 2)
        return {{{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}}, {1.0}};
    throw DomainError("quadrature: dimension must be 1 or 2");
}

QuadratureRule three_point_rule(int dimension)
{
    if (dimension == 1) {
        const double a = 0.5 * std::sqrt(3.0 / 5.0);
        return {{{0.5 - a, 0.5 + a, 0.0}, {0.5, 0.5, 0.0}, {0.5 + a, 0.5 - a, 0.0}},
                {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0}};
    }
    if (dimension == 2) {
        const double a = 2.0 / 3.0, b = 1.0 / 6.0;
        return {{{a, b, b}, {b, a, b}, {b, b, a}}, {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}};
    }
    throw DomainError("quadrature: dimension must be 1 or 2");
}

double integrate(const Mesh& mesh, std::span<const double> cell_values)
{
    if (cell_values.size() != mesh.num_cells())
        throw DomainError("integrate: expected " + std::to_string(mesh.num_cells()) +
                          " cell values, got " + std::to_string(cell_values.size()));
    CompensatedSum sum;
    for (std::size_t c = 0; c < cell_values.size(); ++c)
        sum.add(cell_values[c] * mesh.cell_volume(c));
    return sum.value();
}

} // namespace plap
