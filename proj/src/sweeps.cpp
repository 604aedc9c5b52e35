#include "plap/sweeps.hpp"

#include "plap/error.hpp"
#include "plap/picone.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace plap {

double uniform01(std::mt19937_64& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double standard_normal(std::mt19937_64& rng)
{
    const double u1 = 1.0 - uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Vec3 random_vector(std::mt19937_64& rng)
{
    Vec3 v{standard_normal(rng), standard_normal(rng), standard_normal(rng)};
    const double n = norm(v);
    const double length = std::pow(10.0, -2.0 + 3.0 * uniform01(rng));
    if (n == 0.0)
        return {length, 0.0, 0.0};
    for (double& x : v)
        x *= length / n;
    return v;
}

bool PiconeSweep::passed() const noexcept
{
    return invalid_cells == 0 && identity_violations == 0 && max_identity_gap <= 1e-10 * (1.0 + max_abs_l) &&
           min_l >= -1e-12 && max_proportional_l <= 1e-12;
}

PiconeSweep picone_random_sweep(const Mesh& mesh, double p, std::size_t samples, double v_min,
                                std::mt19937_64& rng)
{
    if (!(v_min > 0.0))
        throw DomainError("v_min must be positive");
    PiconeSweep out;
    out.p = p;
    out.samples = samples;
    out.min_l = std::numeric_limits<double>::infinity();
    const std::size_t n = mesh.num_vertices();
    std::vector<double> u(n), v(n);
    for (std::size_t s = 0; s < samples; ++s) {
        for (std::size_t i = 0; i < n; ++i) {
            u[i] = uniform01(rng);
            v[i] = v_min + uniform01(rng);
        }
        const DiscreteFunction vf(mesh, v);
        const PiconeField field = picone_pointwise(mesh, DiscreteFunction(mesh, u), vf, p, PiconeMode::chain_rule);
        out.cells_checked += field.l_values.size();
        out.invalid_cells += field.l_values.size() - field.valid_count();
        const double scale = 1.0 + field.max_abs_l();
        for (std::size_t c = 0; c < field.l_values.size(); ++c)
            if (field.valid[c] && std::abs(field.l_values[c] - field.r_values[c]) > 1e-10 * scale)
                ++out.identity_violations;
        out.max_identity_gap = std::max(out.max_identity_gap, field.max_identity_gap());
        out.max_abs_l = std::max(out.max_abs_l, field.max_abs_l());
        out.min_l = std::min(out.min_l, field.min_l());

        const double k = 0.1 + 2.0 * uniform01(rng);
        std::vector<double> ku(n);
        for (std::size_t i = 0; i < n; ++i)
            ku[i] = k * v[i];
        const PiconeField prop = picone_pointwise(mesh, DiscreteFunction(mesh, ku), vf, p, PiconeMode::chain_rule);
        out.max_proportional_l = std::max(out.max_proportional_l, prop.max_abs_l());
    }
    if (samples == 0)
        out.min_l = 0.0;
    return out;
}

RatioExtremes sample_inequality_ratios(double p, std::size_t samples, std::mt19937_64& rng)
{
    RatioExtremes e;
    e.min_sub2_lower = std::numeric_limits<double>::infinity();
    e.min_super2_lower = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < samples; ++s) {
        const Vec3 a = random_vector(rng);
        const Vec3 b = random_vector(rng);
        const InequalityRatios r = inequality_ratios(a, b, p);
        if (!std::isnan(r.upper))
            e.max_upper = std::max(e.max_upper, r.upper);
        if (!std::isnan(r.sub2_lower))
            e.min_sub2_lower = std::min(e.min_sub2_lower, r.sub2_lower);
        if (!std::isnan(r.super2_lower))
            e.min_super2_lower = std::min(e.min_super2_lower, r.super2_lower);
    }
    e.samples = samples;
    return e;
}

InequalityConstants calibrated_constants(double p, const RatioExtremes& extremes)
{
    InequalityConstants c;
    if (p <= 2.0) {
        c.sub2_upper = 2.0 * extremes.max_upper;
        c.sub2_lower = 0.5 * extremes.min_sub2_lower;
    } else {
        c.super2_lower = 0.5 * extremes.min_super2_lower;
    }
    return c;
}

InequalitySweep inequality_sweep(double p, const InequalityConstants& constants, std::size_t pairs,
                                 std::mt19937_64& rng)
{
    InequalitySweep out;
    out.p = p;
    out.constants = constants;
    out.pairs = pairs;
    out.min_slack = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < pairs; ++s) {
        const Vec3 a = random_vector(rng);
        const Vec3 b = random_vector(rng);
        const double slack = algebraic_inequalities(a, b, p, constants).active_min();
        out.min_slack = std::min(out.min_slack, slack);
        if (!(slack >= -1e-12))
            ++out.violations;
    }
    return out;
}

PairingSweep pairing_sweep(double p, std::size_t pairs, std::mt19937_64& rng)
{
    PairingSweep out;
    out.p = p;
    out.pairs = pairs;
    out.min_pairing = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < pairs; ++s) {
        const Vec3 a = random_vector(rng);
        const Vec3 b = random_vector(rng);
        const double m = monotonicity_pairing(a, b, p);
        out.min_pairing = std::min(out.min_pairing, m);
        if (!(m >= -1e-12))
            ++out.violations;
    }
    return out;
}

DiscreteFunction random_function(const Mesh& mesh, std::size_t index, std::mt19937_64& rng)
{
    const std::size_t n = mesh.num_vertices();
    std::vector<double> values(n);
    if (index % 4 == 3) {
        const double amplitude = 0.1 + 10.0 * uniform01(rng);
        const double freq = 1.0 + std::floor(3.0 * uniform01(rng));
        const double shift = uniform01(rng);
        for (std::size_t i = 0; i < n; ++i) {
            double prod = amplitude;
            for (int d = 0; d < mesh.embedding_dimension(); ++d)
                prod *= std::sin(2.0 * std::numbers::pi * (freq * mesh.vertex(i)[d] + shift));
            values[i] = prod;
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            const double sign = uniform01(rng) < 0.5 ? -1.0 : 1.0;
            values[i] = sign * std::pow(1.0 - uniform01(rng), -1.0 / 3.0);
        }
    }
    return {mesh, std::move(values)};
}

EmbeddingSweep embedding_sweep(const Mesh& mesh, std::span<const double> q_values, std::size_t count,
                               std::mt19937_64& rng)
{
    EmbeddingSweep out;
    for (std::size_t f = 0; f < count; ++f) {
        const DiscreteFunction u = random_function(mesh, f, rng);
        const DistributionCurve curve = distribution_function(mesh, u, default_thresholds(u.values()));
        for (double q : q_values) {
            EmbeddingRow row{f, q, marcinkiewicz_norm(curve, q), std::pow(lp_norm(mesh, u, q), q)};
            if (row.weak_norm > row.strong_norm + 1e-10)
                ++out.violations;
            out.rows.push_back(row);
        }
    }
    return out;
}

} // namespace plap
