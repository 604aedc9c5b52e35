#include "plap/fields.hpp"

#include "plap/cell_pieces.hpp"
#include "plap/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace plap {

DiscreteFunction::DiscreteFunction(const Mesh& mesh, std::vector<double> values)
    : mesh_(mesh.id()), values_(std::move(values))
{
    if (values_.size() != mesh.num_vertices())
        throw DomainError("discrete function has " + std::to_string(values_.size()) +
                          " values, mesh has " + std::to_string(mesh.num_vertices()) + " vertices");
    for (double v : values_)
        if (!std::isfinite(v))
            throw DomainError("discrete function values must be finite");
}

DiscreteFunction DiscreteFunction::zeros(const Mesh& mesh)
{
    return DiscreteFunction(mesh, std::vector<double>(mesh.num_vertices(), 0.0));
}

DiscreteFunction DiscreteFunction::constant(const Mesh& mesh, double c)
{
    return DiscreteFunction(mesh, std::vector<double>(mesh.num_vertices(), c));
}

DiscreteFunction DiscreteFunction::with_values(std::vector<double> values) const
{
    if (values.size() != values_.size())
        throw DomainError("with_values: size mismatch");
    for (double v : values)
        if (!std::isfinite(v))
            throw DomainError("discrete function values must be finite");
    DiscreteFunction out;
    out.mesh_ = mesh_;
    out.values_ = std::move(values);
    return out;
}

void DiscreteFunction::require_mesh(const Mesh& mesh, const char* context) const
{
    if (mesh_ != mesh.id() || values_.size() != mesh.num_vertices())
        throw DomainError(std::string(context) + ": function does not live on this mesh");
}

double DiscreteFunction::max_abs() const noexcept
{
    double m = 0.0;
    for (double v : values_)
        m = std::max(m, std::abs(v));
    return m;
}

DiscreteFunction& DiscreteFunction::operator+=(const DiscreteFunction& other)
{
    if (mesh_ != other.mesh_)
        throw DomainError("cannot combine functions on different meshes");
    for (std::size_t i = 0; i < values_.size(); ++i)
        values_[i] += other.values_[i];
    return *this;
}

DiscreteFunction& DiscreteFunction::operator-=(const DiscreteFunction& other)
{
    if (mesh_ != other.mesh_)
        throw DomainError("cannot combine functions on different meshes");
    for (std::size_t i = 0; i < values_.size(); ++i)
        values_[i] -= other.values_[i];
    return *this;
}

DiscreteFunction& DiscreteFunction::operator*=(double s) noexcept
{
    for (double& v : values_)
        v *= s;
    return *this;
}

std::vector<double> GradientField::magnitudes() const
{
    std::vector<double> out(vectors_.size());
    for (std::size_t c = 0; c < vectors_.size(); ++c)
        out[c] = norm(vectors_[c]);
    return out;
}

DiscreteFunction truncate(const DiscreteFunction& u, double k)
{
    if (!(k > 0.0))
        throw DomainError("truncation level must be positive");
    std::vector<double> out(u.values().begin(), u.values().end());
    for (double& v : out)
        v = truncate_value(v, k);
    return u.with_values(std::move(out));
}

Vec3 cell_gradient(const Mesh& mesh, std::span<const double> nodal, std::size_t c)
{
    const auto nodes = mesh.cell(c);
    const auto grads = mesh.basis_gradients(c);
    Vec3 g{0.0, 0.0, 0.0};
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        const double uj = nodal[static_cast<std::size_t>(nodes[j])];
        for (int k = 0; k < 3; ++k)
            g[k] += uj * grads[j][k];
    }
    return g;
}

GradientField gradient(const Mesh& mesh, const DiscreteFunction& u)
{
    u.require_mesh(mesh, "gradient");
    std::vector<Vec3> out(mesh.num_cells());
    for (std::size_t c = 0; c < mesh.num_cells(); ++c)
        out[c] = cell_gradient(mesh, u.values(), c);
    return GradientField(mesh.id(), std::move(out));
}

TruncationGradientReport truncation_gradient_check(const Mesh& mesh, const DiscreteFunction& u, double k)
{
    u.require_mesh(mesh, "truncation_gradient_check");
    const DiscreteFunction t = truncate(u, k);
    TruncationGradientReport report;
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
        const auto nodes = mesh.cell(c);
        bool all_inside = true, all_above = true, all_below = true;
        for (Index v : nodes) {
            const double x = u[static_cast<std::size_t>(v)];
            all_inside = all_inside && std::abs(x) < k;
            all_above = all_above && x > k;
            all_below = all_below && x < -k;
        }
        const Vec3 gu = cell_gradient(mesh, u.values(), c);
        const Vec3 gt = cell_gradient(mesh, t.values(), c);
        const Vec3 diff{gt[0] - gu[0], gt[1] - gu[1], gt[2] - gu[2]};
        if (all_inside) {
            ++report.interior_cells;
            report.interior_discrepancy = std::max(report.interior_discrepancy, norm(diff));
        } else if (all_above || all_below) {
            ++report.saturated_cells;
            report.saturated_discrepancy = std::max(report.saturated_discrepancy, norm(gt));
        } else {
            ++report.mixed_cells;
            report.mixed_discrepancy = std::max(report.mixed_discrepancy, norm(diff));
        }
    }
    return report;
}

namespace {

// (F(y) - F(x)) / (y - x), with 3-point Gauss on F' when x and y nearly coincide.
template <class F, class DF>
double divided_difference(const F& f, const DF& df, double x, double y)
{
    const double h = y - x;
    if (std::abs(h) > 1e-4 * (std::abs(x) + std::abs(y)))
        return (f(y) - f(x)) / h;
    const double m = 0.5 * (x + y), r = 0.5 * h * std::sqrt(0.6);
    return (5.0 * df(m - r) + 8.0 * df(m) + 5.0 * df(m + r)) / 18.0;
}

} // namespace

double simplex_power_mean(std::span<const double> values, double p)
{
    const auto g = [p](double x) { return std::pow(std::abs(x), p); };
    const auto g1 = [p](double x) { return std::copysign(std::pow(std::abs(x), p + 1.0) / (p + 1.0), x); };
    const auto g2 = [p](double x) { return std::pow(std::abs(x), p + 2.0) / ((p + 1.0) * (p + 2.0)); };
    if (values.size() == 2)
        return divided_difference(g1, g, values[0], values[1]);
    if (values.size() != 3)
        throw DomainError("simplex_power_mean: expected 2 or 3 nodal values");

    std::array<double, 3> v{values[0], values[1], values[2]};
    std::sort(v.begin(), v.end());
    const auto [a, b, c] = v;
    if (c - a <= 1e-4 * (std::abs(a) + std::abs(c))) {
        // second-order Taylor about the mean; a, b, c share a sign here
        const double m = (a + b + c) / 3.0;
        const double var = (a * a + b * b + c * c - a * b - b * c - c * a) / 18.0;
        if (var == 0.0)
            return g(m);
        return g(m) + 0.5 * p * (p - 1.0) * std::pow(std::abs(m), p - 2.0) * var;
    }
    const double left = divided_difference(g2, g1, a, b);
    const double right = divided_difference(g2, g1, b, c);
    return 2.0 * (right - left) / (c - a);
}

double lp_norm(const Mesh& mesh, const DiscreteFunction& u, double p)
{
    u.require_mesh(mesh, "lp_norm");
    if (!(p >= 1.0))
        throw DomainError("lp_norm: exponent must be at least 1");
    CompensatedSum sum;
    std::array<double, 3> w{};
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
        const auto nodes = mesh.cell(c);
        for (std::size_t j = 0; j < nodes.size(); ++j)
            w[j] = u[static_cast<std::size_t>(nodes[j])];
        sum.add(simplex_power_mean(std::span<const double>(w.data(), nodes.size()), p) * mesh.cell_volume(c));
    }
    return std::pow(sum.value(), 1.0 / p);
}

double lp_norm(const Mesh& mesh, const DiscreteFunction& u, double p, const QuadratureRule& rule)
{
    u.require_mesh(mesh, "lp_norm");
    if (!(p >= 1.0))
        throw DomainError("lp_norm: exponent must be at least 1");
    CompensatedSum sum;
    std::array<double, 3> w{};
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
        const auto nodes = mesh.cell(c);
        for (std::size_t j = 0; j < nodes.size(); ++j)
            w[j] = u[static_cast<std::size_t>(nodes[j])];
        const std::span<const double> wv(w.data(), nodes.size());
        double cell = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q)
            cell += rule.weights[q] * std::pow(std::abs(eval_linear(wv, rule.points[q])), p);
        sum.add(cell * mesh.cell_volume(c));
    }
    return std::pow(sum.value(), 1.0 / p);
}

double grad_lp_norm(const Mesh& mesh, const GradientField& g, double p)
{
    if (g.mesh_id() != mesh.id() || g.size() != mesh.num_cells())
        throw DomainError("grad_lp_norm: gradient field does not live on this mesh");
    if (!(p >= 1.0))
        throw DomainError("grad_lp_norm: exponent must be at least 1");
    CompensatedSum sum;
    for (std::size_t c = 0; c < mesh.num_cells(); ++c)
        sum.add(std::pow(norm(g[c]), p) * mesh.cell_volume(c));
    return std::pow(sum.value(), 1.0 / p);
}

double w1p_norm(const Mesh& mesh, const DiscreteFunction& u, double p)
{
    return grad_lp_norm(mesh, gradient(mesh, u), p) + lp_norm(mesh, u, p);
}

double abs_integral(const Mesh& mesh, const DiscreteFunction& u)
{
    u.require_mesh(mesh, "abs_integral");
    const double zero = 0.0;
    const auto centre = midpoint_rule(mesh.dimension()).points[0];
    CompensatedSum sum;
    std::array<double, 3> w{};
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
        const auto nodes = mesh.cell(c);
        for (std::size_t j = 0; j < nodes.size(); ++j)
            w[j] = u[static_cast<std::size_t>(nodes[j])];
        const std::span<const double> wv(w.data(), nodes.size());
        double cell = 0.0;
        for (const CellPiece& piece : split_cell(mesh.dimension(), wv, {&zero, 1}))
            cell += piece.fraction * std::abs(eval_linear(wv, map_to_piece(piece, mesh.dimension(), centre)));
        sum.add(cell * mesh.cell_volume(c));
    }
    return sum.value();
}

double mean_value(const Mesh& mesh, const DiscreteFunction& u)
{
    u.require_mesh(mesh, "mean_value");
    const auto mass = mesh.lumped_mass();
    CompensatedSum sum;
    for (std::size_t i = 0; i < u.size(); ++i)
        sum.add(mass[i] * u[i]);
    return sum.value() / mesh.total_volume();
}

double poincare_ratio(const Mesh& mesh, const DiscreteFunction& u, double p)
{
    const double grad = grad_lp_norm(mesh, gradient(mesh, u), p);
    if (!(grad > 0.0))
        throw DegenerateInput("poincare_ratio: gradient vanishes identically");
    const double m = mean_value(mesh, u);
    std::vector<double> centred(u.values().begin(), u.values().end());
    for (double& v : centred)
        v -= m;
    return lp_norm(mesh, u.with_values(std::move(centred)), p) / grad;
}

} // namespace plap
