#include "plap/data.hpp"

#include "plap/error.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace plap {

Index center_vertex(const Mesh& mesh)
{
    Point lo, hi;
    lo.fill(std::numeric_limits<double>::infinity());
    hi.fill(-std::numeric_limits<double>::infinity());
    for (const Point& x : mesh.vertices())
        for (int k = 0; k < 3; ++k) {
            lo[k] = std::min(lo[k], x[k]);
            hi[k] = std::max(hi[k], x[k]);
        }
    Point mid;
    for (int k = 0; k < 3; ++k)
        mid[k] = 0.5 * (lo[k] + hi[k]);
    Index best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
        const Point& x = mesh.vertex(i);
        double d = 0.0;
        for (int k = 0; k < 3; ++k)
            d += (x[k] - mid[k]) * (x[k] - mid[k]);
        if (d < best_d) {
            best_d = d;
            best = static_cast<Index>(i);
        }
    }
    return best;
}

double patch_volume(const Mesh& mesh, Index v)
{
    if (v < 0 || static_cast<std::size_t>(v) >= mesh.num_vertices())
        throw DomainError("vertex index out of range");
    double vol = 0.0;
    for (std::size_t c = 0; c < mesh.num_cells(); ++c)
        for (Index w : mesh.cell(c))
            if (w == v)
                vol += mesh.cell_volume(c);
    return vol;
}

DiscreteFunction spike_datum(const Mesh& mesh, Index v)
{
    std::vector<double> values(mesh.num_vertices(), 0.0);
    values[static_cast<std::size_t>(v)] = (mesh.dimension() + 1) / patch_volume(mesh, v);
    return DiscreteFunction(mesh, std::move(values));
}

DiscreteFunction sin_datum(const Mesh& mesh, double frequency)
{
    if (!std::isfinite(frequency))
        throw DomainError("frequency must be finite");
    std::vector<double> values(mesh.num_vertices());
    for (std::size_t i = 0; i < values.size(); ++i) {
        double s = 1.0;
        for (int k = 0; k < mesh.embedding_dimension(); ++k)
            s *= std::sin(2.0 * std::numbers::pi * frequency * mesh.vertex(i)[k]);
        values[i] = s;
    }
    return DiscreteFunction(mesh, std::move(values));
}

double interval_closed_form(double x, double p, double length, double c)
{
    const double q = p / (p - 1.0);
    const double amp = std::copysign(std::pow(std::abs(c), 1.0 / (p - 1.0)), c);
    const double half = 0.5 * length;
    return amp * (std::pow(half, q) - std::pow(std::abs(x - half), q)) / q;
}

IntervalErrors interval_errors(const Mesh& mesh, const DiscreteFunction& u, double p, double c)
{
    u.require_mesh(mesh, "interval_errors");
    if (mesh.dimension() != 1 || mesh.embedding_dimension() != 1 || mesh.closed())
        throw DomainError("interval_errors: needs an interval mesh");
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const Point& x : mesh.vertices()) {
        lo = std::min(lo, x[0]);
        hi = std::max(hi, x[0]);
    }
    if (lo != 0.0)
        throw DomainError("interval_errors: the interval must start at 0");
    const double length = hi;

    static constexpr std::array<double, 5> gx{-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                              0.9061798459386640};
    static constexpr std::array<double, 5> gw{0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                              0.4786286704993665, 0.2369268850561891};
    IntervalErrors e;
    CompensatedSum l2;
    for (std::size_t i = 0; i < u.size(); ++i)
        e.nodal_linf = std::max(e.nodal_linf, std::abs(u[i] - interval_closed_form(mesh.vertex(i)[0], p, length, c)));
    e.linf = e.nodal_linf;
    for (std::size_t cell = 0; cell < mesh.num_cells(); ++cell) {
        const auto nodes = mesh.cell(cell);
        const auto a = static_cast<std::size_t>(nodes[0]), b = static_cast<std::size_t>(nodes[1]);
        const double xa = mesh.vertex(a)[0], xb = mesh.vertex(b)[0];
        const auto uh = [&](double t) { return (1.0 - t) * u[a] + t * u[b]; };
        for (int j = 1; j < 8; ++j) {
            const double t = j / 8.0;
            e.linf = std::max(e.linf, std::abs(uh(t) - interval_closed_form(xa + t * (xb - xa), p, length, c)));
        }
        const double len = std::abs(xb - xa);
        for (std::size_t g = 0; g < gx.size(); ++g) {
            const double t = 0.5 * (1.0 + gx[g]);
            const double d = uh(t) - interval_closed_form(xa + t * (xb - xa), p, length, c);
            l2.add(0.5 * len * gw[g] * d * d);
        }
    }
    e.l2 = std::sqrt(l2.value());
    return e;
}

} // namespace plap
