#include "plap/error.hpp"
#include "plap/solver.hpp"
#include "plap/sweeps.hpp"

#include <doctest.h>

#include <cmath>

using namespace plap;

namespace {

double naive_remainder(const Vec3& a, const Vec3& b, double p)
{
    const Vec3 s{a[0] + b[0], a[1] + b[1], a[2] + b[2]};
    const double na = norm(a);
    const double flux = na > 0.0 ? std::pow(na, p - 2.0) * dot(a, b) : 0.0;
    return std::pow(norm(s), p) - std::pow(na, p) - p * flux;
}

} // namespace

TEST_SUITE("inequalities")
{
    TEST_CASE("monotonicity pairing special cases")
    {
        const Vec3 x{0.3, -1.2, 2.0}, y{1.1, 0.4, -0.7};
        for (double p : {1.3, 2.0, 4.0})
            CHECK(monotonicity_pairing(x, x, p) == 0.0);
        const Vec3 d{x[0] - y[0], x[1] - y[1], x[2] - y[2]};
        CHECK(monotonicity_pairing(x, y, 2.0) == doctest::Approx(dot(d, d)).epsilon(1e-14));
        CHECK(monotonicity_pairing(Vec3{}, Vec3{}, 1.5) == 0.0);
        CHECK_THROWS_AS(monotonicity_pairing(x, y, 1.0), DomainError);
    }

    TEST_CASE("monotonicity holds on random pairs")
    {
        std::mt19937_64 rng(2024);
        for (double p : {1.3, 2.0, 4.0}) {
            const PairingSweep s = pairing_sweep(p, 100000, rng);
            CHECK(s.violations == 0);
            CHECK(s.min_pairing >= -1e-12);
        }
    }

    TEST_CASE("stable remainder agrees with the naive formula where it is well conditioned")
    {
        std::mt19937_64 rng(1);
        for (double p : {1.2, 1.5, 2.0, 3.0, 4.5}) {
            for (int i = 0; i < 2000; ++i) {
                const Vec3 a = random_vector(rng), b = random_vector(rng);
                const double naive = naive_remainder(a, b, p);
                const double scale = std::pow(norm(a) + norm(b), p);
                CHECK(std::abs(bregman_remainder(a, b, p) - naive) <= 1e-12 * scale);
            }
        }
        // p = 2 is |b|^2 exactly.
        const Vec3 a{1.0, 2.0, -0.5}, b{1e-9, -3e-9, 2e-9};
        CHECK(bregman_remainder(a, b, 2.0) == doctest::Approx(dot(b, b)).epsilon(1e-12));
        // Tiny increments keep relative accuracy: r ~ p(p-1)/2 |a|^(p-2) |b|^2 along a.
        const Vec3 e{1.0, 0.0, 0.0}, tiny{1e-7, 0.0, 0.0};
        CHECK(bregman_remainder(e, tiny, 3.0) == doctest::Approx(3.0 * 1e-14).epsilon(1e-6));
        CHECK(bregman_remainder(Vec3{}, b, 1.5) == doctest::Approx(std::pow(norm(b), 1.5)).epsilon(1e-14));
    }

    TEST_CASE("inequality slacks at degenerate inputs")
    {
        const InequalityConstants c{1.0, 0.1, 0.1};
        for (double p : {1.5, 2.0, 3.0}) {
            const InequalitySlacks z = algebraic_inequalities(Vec3{}, Vec3{}, p, c);
            CHECK(z.sub2_upper >= 0.0);
            CHECK(z.sub2_lower >= 0.0);
            CHECK(z.super2_upper >= 0.0);
            CHECK(z.super2_lower >= 0.0);
            const InequalitySlacks s = algebraic_inequalities(Vec3{1.0, 2.0, 0.0}, Vec3{}, p, c);
            CHECK(s.sub2_upper == 0.0);
            CHECK(s.super2_upper == 0.0);
            CHECK(s.sub2_branch == (p <= 2.0));
        }
    }

    TEST_CASE("calibrated constants leave no violations on fresh samples")
    {
        for (double p : {1.2, 1.5, 2.0, 2.5, 3.0, 4.0}) {
            CAPTURE(p);
            std::mt19937_64 calib(100), fresh(200);
            const RatioExtremes ex = sample_inequality_ratios(p, 200000, calib);
            const InequalityConstants c = calibrated_constants(p, ex);
            if (p <= 2.0) {
                CHECK(c.sub2_upper > 0.0);
                CHECK(c.sub2_lower > 0.0);
            } else {
                CHECK(c.super2_lower > 0.0);
            }
            const InequalitySweep s = inequality_sweep(p, c, 100000, fresh);
            CHECK(s.violations == 0);
        }
    }

    TEST_CASE("p = 2 ratios are exactly one")
    {
        std::mt19937_64 rng(8);
        for (int i = 0; i < 100; ++i) {
            const InequalityRatios r = inequality_ratios(random_vector(rng), random_vector(rng), 2.0);
            CHECK(r.upper == doctest::Approx(1.0).epsilon(1e-10));
            CHECK(r.super2_lower == doctest::Approx(3.0).epsilon(1e-10));
        }
    }

    TEST_CASE("overly large constants are detected")
    {
        std::mt19937_64 rng(3);
        const InequalityConstants tight{1e-3, 10.0, 0.0};
        CHECK(inequality_sweep(1.5, tight, 1000, rng).violations > 0);
    }
}
