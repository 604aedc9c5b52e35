#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace plap {

using Index = std::int32_t;
using Point = std::array<double, 3>;
using Vec3 = std::array<double, 3>;

/// Opaque identity of a mesh. Copies of a mesh share the identity; every
/// constructed or loaded mesh gets a fresh one.
struct MeshId {
    std::uint64_t value = 0;
    friend bool operator==(MeshId, MeshId) = default;
};

/// Simplicial mesh (segments for N = 1, triangles for N = 2) of a compact
/// manifold, with the metric absorbed into per-cell volumes.
///
/// Vertices live in an embedding space of dimension 1..3. Periodic meshes
/// (flat tori) carry a per-axis period; cell geometry is then evaluated with
/// the minimum-image convention along those axes.
///
/// The mesh is immutable after construction. The constructor validates the
/// index range, cell non-degeneracy, the closed/boundary consistency and the
/// connectivity of the cell graph, and throws MeshError on failure.
class Mesh {
public:
    Mesh(int dimension,
         int embedding_dimension,
         std::vector<Point> vertices,
         std::vector<Index> cell_nodes,
         std::vector<Index> boundary_nodes,
         bool closed,
         Point period = {0.0, 0.0, 0.0});

    MeshId id() const noexcept { return id_; }

    /// Intrinsic dimension N.
    int dimension() const noexcept { return dim_; }
    int embedding_dimension() const noexcept { return embed_dim_; }
    int nodes_per_cell() const noexcept { return dim_ + 1; }

    std::size_t num_vertices() const noexcept { return vertices_.size(); }
    std::size_t num_cells() const noexcept { return volumes_.size(); }

    const Point& vertex(std::size_t i) const { return vertices_[i]; }
    std::span<const Point> vertices() const noexcept { return vertices_; }

    std::span<const Index> cell(std::size_t c) const
    {
        return {cell_nodes_.data() + c * static_cast<std::size_t>(nodes_per_cell()),
                static_cast<std::size_t>(nodes_per_cell())};
    }
    std::span<const Index> cell_nodes() const noexcept { return cell_nodes_; }

    /// Riemannian volume of one cell (length in 1D, area in 2D).
    double cell_volume(std::size_t c) const { return volumes_[c]; }
    std::span<const double> cell_volumes() const noexcept { return volumes_; }
    double total_volume() const noexcept { return total_volume_; }

    /// Gradients (in embedding coordinates) of the barycentric coordinate
    /// functions of cell c, one per local node.
    std::span<const Vec3> basis_gradients(std::size_t c) const
    {
        return {basis_grads_.data() + c * static_cast<std::size_t>(nodes_per_cell()),
                static_cast<std::size_t>(nodes_per_cell())};
    }

    /// Integral of each nodal hat function (row sums of the P1 mass matrix).
    std::span<const double> lumped_mass() const noexcept { return lumped_mass_; }

    std::span<const Index> boundary_nodes() const noexcept { return boundary_; }
    bool is_boundary(Index i) const { return on_boundary_[static_cast<std::size_t>(i)] != 0; }
    bool closed() const noexcept { return closed_; }

    const Point& period() const noexcept { return period_; }
    bool periodic() const noexcept;

    /// Displacement from vertex a to vertex b, minimum image along periodic axes.
    Vec3 displacement(Index a, Index b) const;

    /// Structural equality (ignores identity).
    bool same_geometry(const Mesh& other, double rel_tol = 0.0) const;

private:
    void build_geometry();
    void validate_connectivity() const;

    MeshId id_;
    int dim_;
    int embed_dim_;
    std::vector<Point> vertices_;
    std::vector<Index> cell_nodes_;
    std::vector<Index> boundary_;
    std::vector<unsigned char> on_boundary_;
    bool closed_;
    Point period_;

    std::vector<double> volumes_;
    std::vector<Vec3> basis_grads_;
    std::vector<double> lumped_mass_;
    double total_volume_ = 0.0;
};

/// Quadrature rule on the reference simplex, in barycentric coordinates.
struct QuadratureRule {
    std::vector<std::array<double, 3>> points;
    std::vector<double> weights; // positive, summing to 1

    std::size_t size() const noexcept { return weights.size(); }
};

/// One-point barycentre rule, exact for affine integrands.
QuadratureRule midpoint_rule(int dimension);

/// Three-point rule: Gauss-Legendre (degree 5) in 1D, interior Strang-Fix
/// (degree 2) in 2D.
QuadratureRule three_point_rule(int dimension);

/// Uniform mesh of [0, length] with n_cells segments; boundary = both ends.
Mesh build_interval_mesh(int n_cells, double length);

/// Periodic triangulation of [0,lx) x [0,ly), two triangles per grid square.
Mesh build_flat_torus_mesh(int nx, int ny, double lx, double ly);

/// Triangulation of [0,lx] x [0,ly] with the perimeter as boundary.
Mesh build_rectangle_mesh(int nx, int ny, double lx, double ly);

inline constexpr int kMaxSphereSubdivisions = 8;

/// Icosahedron refined 1-to-4 `subdivisions` times and projected to the
/// sphere of the given radius. Cell volumes are flat triangle areas.
Mesh build_triangulated_sphere(int subdivisions, double radius);

/// Mesh text format: see README ("Mesh files").
void save_mesh(const Mesh& mesh, const std::filesystem::path& path);
Mesh load_mesh(const std::filesystem::path& path);
Mesh parse_mesh(std::string_view text);
std::string format_mesh(const Mesh& mesh);

/// Sum over cells of value * cell volume, compensated, in cell order.
double integrate(const Mesh& mesh, std::span<const double> cell_values);

/// Neumaier-compensated sum, accumulated in order.
class CompensatedSum {
public:
    void add(double x) noexcept
    {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

} // namespace plap
