#include "plap/cell_pieces.hpp"
#include "plap/error.hpp"
#include "plap/fields.hpp"

#include <algorithm>
#include <limits>

namespace plap {

namespace {

void require_increasing(std::span<const double> thresholds, bool allow_zero)
{
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        const double t = thresholds[i];
        if (!std::isfinite(t) || t < 0.0 || (!allow_zero && t == 0.0))
            throw DomainError("thresholds must be positive and finite");
        if (i > 0 && !(t > thresholds[i - 1]))
            throw DomainError("thresholds must be strictly increasing");
    }
}

// meas{|u| > t} (or >= t when at_least) for every t, accumulated in cell order.
std::vector<double> superlevel_measures(const Mesh& mesh, const DiscreteFunction& u,
                                        std::span<const double> thresholds, bool at_least)
{
    std::vector<double> measures(thresholds.size(), 0.0);
    std::array<double, 3> w{};
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
        const auto nodes = mesh.cell(c);
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        bool pos = false, neg = false;
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            w[j] = u[static_cast<std::size_t>(nodes[j])];
            lo = std::min(lo, std::abs(w[j]));
            hi = std::max(hi, std::abs(w[j]));
            pos = pos || w[j] > 0.0;
            neg = neg || w[j] < 0.0;
        }
        if (pos && neg)
            lo = 0.0;
        const std::span<const double> wv(w.data(), nodes.size());
        const double vol = mesh.cell_volume(c);
        for (std::size_t j = 0; j < thresholds.size(); ++j) {
            const double t = thresholds[j];
            if (t > hi)
                break;
            double frac;
            if (t < lo)
                frac = 1.0;
            else
                frac = at_least ? fraction_abs_at_least(wv, t) : fraction_abs_above(wv, t);
            measures[j] += vol * frac;
        }
    }
    return measures;
}

} // namespace

DistributionCurve distribution_function(const Mesh& mesh, const DiscreteFunction& u,
                                        std::span<const double> thresholds)
{
    u.require_mesh(mesh, "distribution_function");
    require_increasing(thresholds, false);
    DistributionCurve curve;
    curve.thresholds.assign(thresholds.begin(), thresholds.end());
    curve.measures = superlevel_measures(mesh, u, thresholds, false);
    return curve;
}

DistributionCurve cell_distribution_function(const Mesh& mesh, std::span<const double> cell_values,
                                             std::span<const double> thresholds)
{
    if (cell_values.size() != mesh.num_cells())
        throw DomainError("cell_distribution_function: one value per cell required");
    require_increasing(thresholds, false);
    DistributionCurve curve;
    curve.thresholds.assign(thresholds.begin(), thresholds.end());
    curve.measures.assign(thresholds.size(), 0.0);
    for (std::size_t c = 0; c < cell_values.size(); ++c) {
        const double a = std::abs(cell_values[c]);
        for (std::size_t j = 0; j < thresholds.size() && thresholds[j] < a; ++j)
            curve.measures[j] += mesh.cell_volume(c);
    }
    return curve;
}

std::vector<double> log_spaced(double lo, double hi, std::size_t count)
{
    if (!(lo > 0.0) || !(hi >= lo) || !std::isfinite(hi))
        throw DomainError("log_spaced: need 0 < lo <= hi");
    if (count == 0)
        return {};
    if (lo == hi || count == 1)
        return {hi};
    std::vector<double> out(count);
    const double a = std::log(lo), b = std::log(hi);
    for (std::size_t i = 0; i < count; ++i)
        out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
    out.front() = lo;
    out.back() = hi;
    return out;
}

std::vector<double> default_thresholds(std::span<const double> values, std::size_t count)
{
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double v : values) {
        const double a = std::abs(v);
        if (a > 0.0)
            lo = std::min(lo, a);
        hi = std::max(hi, a);
    }
    if (!(hi > 0.0))
        return {};
    return log_spaced(lo, hi, count);
}

double marcinkiewicz_norm(const DistributionCurve& curve, double q)
{
    if (curve.empty())
        throw DomainError("marcinkiewicz_norm: empty curve");
    if (!(q > 0.0))
        throw DomainError("marcinkiewicz_norm: q must be positive");
    double best = 0.0;
    for (std::size_t i = 0; i < curve.thresholds.size(); ++i)
        best = std::max(best, std::pow(curve.thresholds[i], q) * curve.measures[i]);
    return best;
}

double LayerCake::relative_gap() const noexcept
{
    const double scale = std::max(std::abs(lhs), std::abs(rhs));
    return scale > 0.0 ? std::abs(lhs - rhs) / scale : 0.0;
}

LayerCake layer_cake_check(const Mesh& mesh, const DiscreteFunction& u, double q, std::size_t n_thresholds)
{
    u.require_mesh(mesh, "layer_cake_check");
    if (!(q >= 1.0))
        throw DomainError("layer_cake_check: q must be at least 1");
    if (n_thresholds < 1)
        throw DomainError("layer_cake_check: need at least one interval");

    LayerCake out;
    out.lhs = std::pow(lp_norm(mesh, u, q), q);
    const double top = u.max_abs();
    if (!(top > 0.0))
        return out;

    std::vector<double> t(n_thresholds + 1);
    for (std::size_t j = 0; j <= n_thresholds; ++j)
        t[j] = top * (static_cast<double>(j) / static_cast<double>(n_thresholds));
    const auto above = superlevel_measures(mesh, u, t, false);
    const auto at_least = superlevel_measures(mesh, u, t, true);

    // Trapezoid in phi with the exact moment of q t^(q-1) on each subinterval;
    // phi is taken from the right at the left end and from the left at the right end.
    CompensatedSum sum;
    double prev_pow = 0.0;
    for (std::size_t j = 0; j < n_thresholds; ++j) {
        const double next_pow = std::pow(t[j + 1], q);
        sum.add((next_pow - prev_pow) * 0.5 * (above[j] + at_least[j + 1]));
        prev_pow = next_pow;
    }
    out.rhs = sum.value();
    return out;
}

TailFit tail_exponent_fit(const DistributionCurve& curve, double k_lo, double k_hi)
{
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < curve.thresholds.size(); ++i) {
        const double k = curve.thresholds[i];
        if (k >= k_lo && k <= k_hi && curve.measures[i] > 0.0 && k > 0.0) {
            xs.push_back(std::log(k));
            ys.push_back(std::log(curve.measures[i]));
        }
    }
    if (xs.size() < 4)
        throw DegenerateInput("tail_exponent_fit: fewer than 4 positive samples in the window");

    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (!(sxx > 0.0))
        throw DegenerateInput("tail_exponent_fit: thresholds do not span an interval");
    TailFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.samples = xs.size();
    if (syy > 0.0) {
        double ss_res = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
            ss_res += r * r;
        }
        fit.r_squared = 1.0 - ss_res / syy;
    } else {
        fit.r_squared = 1.0;
    }
    return fit;
}

} // namespace plap
