#include "plap/error.hpp"
#include "plap/solver.hpp"

#include <algorithm>
#include <limits>

namespace plap {

namespace {

// (1 + x)^h - 1 - h x for x >= -1.
double taylor_tail(double x, double h)
{
    if (std::abs(x) < 0.1) {
        double coeff = h, power = x, sum = 0.0;
        for (int k = 2; k < 40; ++k) {
            coeff *= (h - (k - 1)) / k;
            power *= x;
            const double term = coeff * power;
            sum += term;
            if (std::abs(term) <= 1e-18 * std::abs(sum))
                break;
        }
        return sum;
    }
    return std::expm1(h * std::log1p(std::max(x, -1.0))) - h * x;
}

Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

} // namespace

double bregman_remainder(const Vec3& a, const Vec3& b, double p)
{
    const double aa = dot(a, a);
    const double bsq = dot(b, b);
    if (aa == 0.0)
        return std::pow(bsq, 0.5 * p);
    const double h = 0.5 * p;
    const double x = (2.0 * dot(a, b) + bsq) / aa;
    return std::pow(aa, h) * (taylor_tail(x, h) + h * bsq / aa);
}

double monotonicity_pairing(const Vec3& xi, const Vec3& eta, double p)
{
    if (!(p > 1.0))
        throw DomainError("p must exceed 1");
    const double nx = norm(xi), ne = norm(eta);
    const double cx = nx > 0.0 ? std::pow(nx, p - 2.0) : 0.0;
    const double ce = ne > 0.0 ? std::pow(ne, p - 2.0) : 0.0;
    Vec3 flux_diff{};
    for (int k = 0; k < 3; ++k)
        flux_diff[k] = cx * xi[k] - ce * eta[k];
    return dot(flux_diff, sub(xi, eta));
}

double InequalitySlacks::active_min() const noexcept
{
    return sub2_branch ? std::min(sub2_upper, sub2_lower) : std::min(super2_upper, super2_lower);
}

InequalitySlacks algebraic_inequalities(const Vec3& xi1, const Vec3& xi2, double p,
                                        const InequalityConstants& constants)
{
    if (!(p > 1.0))
        throw DomainError("p must exceed 1");
    const Vec3 d = sub(xi2, xi1);
    const double n1 = norm(xi1), n2 = norm(xi2), nd = norm(d);
    const double r_sum = bregman_remainder(xi1, xi2, p);
    const double r_diff = bregman_remainder(xi1, d, p);

    InequalitySlacks s;
    s.sub2_branch = p <= 2.0;
    s.sub2_upper = constants.sub2_upper * std::pow(n2, p) - r_sum;
    const double weight = n1 + n2 > 0.0 ? nd * nd / std::pow(n1 + n2, 2.0 - p) : 0.0;
    s.sub2_lower = r_diff - constants.sub2_lower * weight;
    const double taylor = n2 > 0.0 ? 0.5 * p * (p - 1.0) * std::pow(n1 + n2, p - 2.0) * n2 * n2 : 0.0;
    s.super2_upper = taylor - r_sum;
    s.super2_lower = r_diff - constants.super2_lower / (std::pow(2.0, p) - 1.0) * std::pow(nd, p);
    return s;
}

InequalityRatios inequality_ratios(const Vec3& xi1, const Vec3& xi2, double p)
{
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    const Vec3 d = sub(xi2, xi1);
    const double n1 = norm(xi1), n2 = norm(xi2), nd = norm(d);
    InequalityRatios r;
    r.upper = n2 > 0.0 ? bregman_remainder(xi1, xi2, p) / std::pow(n2, p) : nan;
    if (nd > 0.0) {
        const double rd = bregman_remainder(xi1, d, p);
        r.sub2_lower = rd * std::pow(n1 + n2, 2.0 - p) / (nd * nd);
        r.super2_lower = (std::pow(2.0, p) - 1.0) * rd / std::pow(nd, p);
    } else {
        r.sub2_lower = nan;
        r.super2_lower = nan;
    }
    return r;
}

} // namespace plap
