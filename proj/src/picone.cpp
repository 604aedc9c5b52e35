#include "plap/picone.hpp"

#include "plap/csv.hpp"
#include "plap/error.hpp"

#include <algorithm>
#include <limits>

namespace plap {

std::size_t PiconeField::valid_count() const
{
    return static_cast<std::size_t>(std::count(valid.begin(), valid.end(), 1));
}

double PiconeField::min_l() const
{
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < l_values.size(); ++c)
        if (valid[c])
            m = std::min(m, l_values[c]);
    return m;
}

double PiconeField::max_abs_l() const
{
    double m = 0.0;
    for (std::size_t c = 0; c < l_values.size(); ++c)
        if (valid[c])
            m = std::max(m, std::abs(l_values[c]));
    return m;
}

double PiconeField::max_identity_gap() const
{
    double m = 0.0;
    for (std::size_t c = 0; c < l_values.size(); ++c)
        if (valid[c])
            m = std::max(m, std::abs(l_values[c] - r_values[c]));
    return m;
}

double PiconeField::identity_gap_l1(const Mesh& mesh) const
{
    if (mesh.id() != this->mesh)
        throw DomainError("identity_gap_l1: field does not live on this mesh");
    CompensatedSum s;
    for (std::size_t c = 0; c < l_values.size(); ++c)
        if (valid[c])
            s.add(std::abs(l_values[c] - r_values[c]) * mesh.cell_volume(c));
    return s.value();
}

double default_positivity_floor(const DiscreteFunction& v)
{
    double m = 0.0;
    for (double x : v.values())
        m = std::max(m, x);
    return 1e-8 * m;
}

namespace {

void require_nonnegative(const DiscreteFunction& u)
{
    for (double x : u.values())
        if (x < 0.0)
            throw DomainError("u must be nonnegative");
}

double flux_dot(const Vec3& gv, const Vec3& x, double p)
{
    const double n = norm(gv);
    return n > 0.0 ? std::pow(n, p - 2.0) * dot(gv, x) : 0.0;
}

// u^p / v^(p-1), written so that u == v gives u exactly.
double picone_ratio(double u, double v, double p)
{
    return u == 0.0 ? 0.0 : u * std::pow(u / v, p - 1.0);
}

} // namespace

PiconeField picone_pointwise(const Mesh& mesh, const DiscreteFunction& u, const DiscreteFunction& v, double p,
                             PiconeMode mode, std::optional<double> floor)
{
    u.require_mesh(mesh, "picone_pointwise");
    v.require_mesh(mesh, "picone_pointwise");
    if (!(p > 1.0))
        throw DomainError("p must exceed 1");
    require_nonnegative(u);
    const double vmin = floor.value_or(default_positivity_floor(v));

    std::vector<double> w;
    if (mode == PiconeMode::interpolated) {
        w.resize(u.size());
        for (std::size_t i = 0; i < w.size(); ++i)
            w[i] = v[i] > vmin ? picone_ratio(u[i], v[i], p) : 0.0;
    }

    PiconeField field;
    field.mesh = mesh.id();
    field.l_values.assign(mesh.num_cells(), 0.0);
    field.r_values.assign(mesh.num_cells(), 0.0);
    field.valid.assign(mesh.num_cells(), 0);
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
        const auto nodes = mesh.cell(c);
        double ubar = 0.0, vbar = 0.0;
        bool ok = true;
        for (Index n : nodes) {
            const auto i = static_cast<std::size_t>(n);
            ubar += u[i];
            vbar += v[i];
            ok = ok && v[i] > vmin;
        }
        if (!ok)
            continue;
        ubar /= static_cast<double>(nodes.size());
        vbar /= static_cast<double>(nodes.size());

        const Vec3 a = cell_gradient(mesh, u.values(), c);
        const Vec3 gv = cell_gradient(mesh, v.values(), c);
        const double s = ubar / vbar;
        const Vec3 b{s * gv[0], s * gv[1], s * gv[2]};
        const Vec3 d{a[0] - b[0], a[1] - b[1], a[2] - b[2]};
        const double L = bregman_remainder(b, d, p);

        Vec3 gw;
        if (mode == PiconeMode::chain_rule) {
            const double cu = p * std::pow(s, p - 1.0);
            const double cv = (p - 1.0) * std::pow(s, p);
            for (int k = 0; k < 3; ++k)
                gw[k] = cu * a[k] - cv * gv[k];
        } else {
            gw = cell_gradient(mesh, w, c);
        }
        const double R = std::pow(norm(a), p) - flux_dot(gv, gw, p);

        field.l_values[c] = L;
        field.r_values[c] = R;
        field.valid[c] = 1;
    }
    return field;
}

PiconeIntegral picone_integral(const Mesh& mesh, const DiscreteFunction& u, const DiscreteFunction& v, double p,
                               std::optional<double> floor)
{
    u.require_mesh(mesh, "picone_integral");
    v.require_mesh(mesh, "picone_integral");
    if (!(p > 1.0))
        throw DomainError("p must exceed 1");
    require_nonnegative(u);
    for (Index b : mesh.boundary_nodes())
        if (u[static_cast<std::size_t>(b)] != 0.0)
            throw DomainError("u must vanish on boundary nodes");
    const double vmin = floor.value_or(default_positivity_floor(v));

    std::vector<double> w(u.size(), 0.0);
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (u[i] == 0.0)
            continue;
        if (!(v[i] > vmin))
            throw DomainError("v falls below the positivity floor where u > 0");
        w[i] = picone_ratio(u[i], v[i], p);
    }

    CompensatedSum lhs, rhs;
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
        const double vol = mesh.cell_volume(c);
        const Vec3 a = cell_gradient(mesh, u.values(), c);
        lhs.add(vol * std::pow(norm(a), p));
        rhs.add(vol * flux_dot(cell_gradient(mesh, v.values(), c), cell_gradient(mesh, w, c), p));
    }
    return {lhs.value(), rhs.value()};
}

namespace {

// -Delta_p w - lambda h w^q as a nodal residual; boundary rows are zero.
std::vector<double> semilinear_residual(const Mesh& mesh, const DiscreteFunction& w, const DiscreteFunction& h,
                                        double lambda, double q, const SolverConfig& config, double& scale)
{
    std::vector<double> rhs(w.size());
    for (std::size_t i = 0; i < rhs.size(); ++i)
        rhs[i] = lambda * h[i] * std::pow(std::max(w[i], 0.0), q);
    const DiscreteFunction data = w.with_values(rhs);
    scale = 0.0;
    for (double b : load_vector(mesh, data, config))
        scale += std::abs(b);
    const DiscreteFunction r = energy_gradient(mesh, w, data, config);
    return {r.values().begin(), r.values().end()};
}

} // namespace

ComparisonReport comparison_check(const Mesh& mesh, const DiscreteFunction& h, double lambda, double q, double mu,
                                  const SolverConfig& config)
{
    if (!(mu > 0.0 && mu <= 1.0))
        throw DomainError("mu must lie in (0, 1]");
    ComparisonReport report;
    const SolveOutcome super = solve_semilinear(mesh, h, lambda, q, config);
    report.iterations = super.iterations;
    report.supersolution = super.solution;
    report.subsolution = mu * super.solution;

    const double tol = 10.0 * config.grad_tol;
    report.worst_gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double gap = report.supersolution[i] - report.subsolution[i];
        report.worst_gap = std::min(report.worst_gap, gap);
        if (gap < -tol)
            ++report.violations;
    }

    double scale = 0.0;
    const auto r_sub = semilinear_residual(mesh, report.subsolution, h, lambda, q, config, scale);
    for (double r : r_sub)
        if (r > tol * scale)
            ++report.sub_residual_violations;
    const auto r_super = semilinear_residual(mesh, report.supersolution, h, lambda, q, config, scale);
    for (double r : r_super)
        if (r < -tol * scale)
            ++report.super_residual_violations;

    const SolveOutcome from_sub = solve_semilinear(mesh, h, lambda, q, config, report.subsolution);
    report.iterations_from_sub = from_sub.iterations;
    report.from_sub_gap = (from_sub.solution - super.solution).max_abs();
    report.converged = super.converged && from_sub.converged;
    return report;
}

std::string format_picone_csv(const PiconeField& field)
{
    std::string out = "cell_index,L,R,valid\n";
    for (std::size_t c = 0; c < field.l_values.size(); ++c) {
        out += std::to_string(c);
        out += ',';
        out += format_real(field.l_values[c]);
        out += ',';
        out += format_real(field.r_values[c]);
        out += ',';
        out += field.valid[c] ? "1\n" : "0\n";
    }
    return out;
}

} // namespace plap
