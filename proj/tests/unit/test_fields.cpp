#include "plap/error.hpp"
#include "plap/fields.hpp"
#include "plap/sweeps.hpp"

#include <doctest.h>

#include <array>

#include <cmath>
#include <numbers>

using namespace plap;

namespace {

DiscreteFunction coordinate(const Mesh& m, int axis, double scale = 1.0, double shift = 0.0)
{
    std::vector<double> v(m.num_vertices());
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = scale * m.vertex(i)[axis] + shift;
    return {m, v};
}

} // namespace

TEST_SUITE("fields")
{
    TEST_CASE("discrete functions only combine on the same mesh")
    {
        const Mesh a = build_interval_mesh(4, 1.0);
        const Mesh b = build_interval_mesh(4, 1.0);
        CHECK_THROWS_AS(DiscreteFunction(a, {1.0, 2.0}), DomainError);
        CHECK_THROWS_AS(DiscreteFunction(a, {0, 0, NAN, 0, 0}), DomainError);
        DiscreteFunction u = DiscreteFunction::constant(a, 1.0);
        CHECK_THROWS_AS(u += DiscreteFunction::constant(b, 1.0), DomainError);
        const Mesh copy = a;
        CHECK_NOTHROW(u += DiscreteFunction::constant(copy, 1.0));
        CHECK(u[2] == 2.0);
    }

    TEST_CASE("truncation clamps nodal values")
    {
        const Mesh m = build_interval_mesh(2, 1.0);
        const DiscreteFunction u(m, {3.0, -1.0, 0.5});
        const DiscreteFunction t = truncate(u, 2.0);
        CHECK(t[0] == 2.0);
        CHECK(t[1] == -1.0);
        CHECK(t[2] == 0.5);

        std::mt19937_64 rng(7);
        const Mesh g = build_flat_torus_mesh(6, 6, 1.0, 1.0);
        for (int trial = 0; trial < 20; ++trial) {
            const DiscreteFunction r = random_function(g, static_cast<std::size_t>(trial), rng);
            const double k = 0.1 + 3.0 * uniform01(rng);
            const DiscreteFunction once = truncate(r, k);
            const DiscreteFunction twice = truncate(truncate(r, k + 0.25), k);
            for (std::size_t i = 0; i < r.size(); ++i)
                CHECK(once[i] == twice[i]);
            const DiscreteFunction id = truncate(r, r.max_abs());
            for (std::size_t i = 0; i < r.size(); ++i)
                CHECK(id[i] == r[i]);
            CHECK(lp_norm(g, once, 2.0) <= lp_norm(g, r, 2.0));
        }
        CHECK_THROWS_AS(truncate(u, 0.0), DomainError);
    }

    TEST_CASE("P1 gradient is exact on affine functions")
    {
        const Mesh m = build_rectangle_mesh(5, 4, 2.0, 1.0);
        std::vector<double> v(m.num_vertices());
        for (std::size_t i = 0; i < v.size(); ++i)
            v[i] = 3.0 * m.vertex(i)[0] - 2.0 * m.vertex(i)[1] + 0.7;
        const GradientField g = gradient(m, DiscreteFunction(m, v));
        for (const Vec3& a : g.vectors()) {
            CHECK(a[0] == doctest::Approx(3.0).epsilon(1e-13));
            CHECK(a[1] == doctest::Approx(-2.0).epsilon(1e-13));
            CHECK(std::abs(a[2]) < 1e-13);
        }
        const GradientField flat = gradient(m, DiscreteFunction::constant(m, 4.0));
        for (const Vec3& a : flat.vectors())
            CHECK(norm(a) < 1e-13);

        const Mesh seg = build_interval_mesh(2, 1.0);
        const Vec3 d = cell_gradient(seg, std::vector<double>{0.0, 1.0, 1.0}, 0);
        CHECK(d[0] == doctest::Approx(2.0));
    }

    TEST_CASE("gradient on the torus uses the minimum image")
    {
        const Mesh m = build_flat_torus_mesh(8, 8, 1.0, 1.0);
        std::vector<double> v(m.num_vertices());
        for (std::size_t i = 0; i < v.size(); ++i)
            v[i] = std::sin(2.0 * std::numbers::pi * m.vertex(i)[0]);
        double max_grad = 0.0;
        for (double g : gradient(m, DiscreteFunction(m, v)).magnitudes())
            max_grad = std::max(max_grad, g);
        CHECK(max_grad <= 2.0 * std::numbers::pi + 1e-9);
        CHECK(max_grad > 0.5 * 2.0 * std::numbers::pi);
    }

    TEST_CASE("exact power mean on a simplex")
    {
        CHECK(simplex_power_mean(std::vector<double>{-1.0, 1.0}, 1.5) == doctest::Approx(1.0 / 2.5).epsilon(1e-14));
        CHECK(simplex_power_mean(std::vector<double>{0.0, 2.0}, 3.0) == doctest::Approx(2.0).epsilon(1e-14));
        CHECK(simplex_power_mean(std::vector<double>{0.0, 0.0, 0.0}, 1.0) == 0.0);
        CHECK(simplex_power_mean(std::vector<double>{-2.0, -2.0, -2.0}, 1.5) == doctest::Approx(std::pow(2.0, 1.5)));

        // composite barycentre rule on an n x n split of the triangle
        const auto brute = [](double a, double b, double c, double p) {
            const int n = 600;
            double sum = 0.0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; i + j < n; ++j) {
                    const auto at = [&](double s, double t) {
                        return std::pow(std::abs(a + (b - a) * s + (c - a) * t), p);
                    };
                    sum += at((i + 1.0 / 3) / n, (j + 1.0 / 3) / n);
                    if (i + j + 1 < n)
                        sum += at((i + 2.0 / 3) / n, (j + 2.0 / 3) / n);
                }
            return sum / (static_cast<double>(n) * n);
        };
        for (double p : {1.0, 1.5, 2.0, 3.0})
            for (const auto& v : {std::array<double, 3>{0.2, 1.0, 3.0}, std::array<double, 3>{-1.0, 0.5, 2.0},
                                  std::array<double, 3>{1.0, 1.0, -0.3}, std::array<double, 3>{0.0, 0.0, 1.0}})
                CHECK(simplex_power_mean(v, p) == doctest::Approx(brute(v[0], v[1], v[2], p)).epsilon(1e-5));

        // no jump where the near-coincidence branches take over
        for (double d : {1e-4 * 1.001, 1e-4 * 0.999, 1e-6, 1e-9}) {
            const double m = 1.0 + d / 2, var = d * d / 24.0;
            CHECK(simplex_power_mean(std::vector<double>{1.0, 1.0 + d / 2, 1.0 + d}, 1.5) ==
                  doctest::Approx(std::pow(m, 1.5) + 0.375 * var / std::sqrt(m)).epsilon(1e-13));
        }
    }

    TEST_CASE("truncation gradient check")
    {
        const Mesh m = build_interval_mesh(16, 1.0);
        const DiscreteFunction u = coordinate(m, 0, 2.0);
        const auto id = truncation_gradient_check(m, u, 5.0);
        CHECK(id.interior_discrepancy == 0.0);
        CHECK(id.saturated_cells == 0);
        CHECK(id.mixed_cells == 0);

        const auto half = truncation_gradient_check(m, u, 1.0);
        CHECK(half.interior_discrepancy == 0.0);
        CHECK(half.saturated_discrepancy == 0.0);
        // the node at x = 0.5 sits exactly on the level
        CHECK(half.saturated_cells == 7);
        CHECK(half.interior_cells == 7);
        CHECK(half.mixed_cells == 2);
        CHECK(half.mixed_discrepancy == doctest::Approx(2.0));
    }

    TEST_CASE("mixed-cell count under refinement for a smooth function")
    {
        std::size_t previous_fraction_num = 0, previous_cells = 1;
        for (int n : {16, 32, 64, 128}) {
            const Mesh m = build_interval_mesh(n, 1.0);
            std::vector<double> v(m.num_vertices());
            for (std::size_t i = 0; i < v.size(); ++i)
                v[i] = std::sin(2.0 * std::numbers::pi * m.vertex(i)[0]);
            const auto r = truncation_gradient_check(m, DiscreteFunction(m, v), 0.5);
            // Mixed cells are those crossing |u| = 0.5; their share shrinks.
            if (previous_fraction_num > 0)
                CHECK(r.mixed_cells * previous_cells <= previous_fraction_num * m.num_cells());
            previous_fraction_num = r.mixed_cells;
            previous_cells = m.num_cells();
        }
    }

    TEST_CASE("Lp norms")
    {
        const Mesh m = build_interval_mesh(64, 1.0);
        CHECK(lp_norm(m, DiscreteFunction::constant(m, -3.0), 1.5) == doctest::Approx(3.0).epsilon(1e-13));
        // Integral of x^2 on [0, 1] is 1/3; P1 interpolation of x is exact.
        CHECK(lp_norm(m, coordinate(m, 0), 2.0) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-13));
        CHECK(abs_integral(m, coordinate(m, 0, 2.0, -1.0)) == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(mean_value(m, coordinate(m, 0)) == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(w1p_norm(m, coordinate(m, 0), 2.0) == doctest::Approx(1.0 + 1.0 / std::sqrt(3.0)).epsilon(1e-13));
        CHECK_THROWS_AS(lp_norm(m, coordinate(m, 0), 0.5), DomainError);
    }

    TEST_CASE("distribution function")
    {
        const Mesh m = build_interval_mesh(10, 1.0);
        const std::vector<double> ks{0.5, 1.0, 1.5, 2.0, 2.5};
        const DistributionCurve c = distribution_function(m, DiscreteFunction::constant(m, 2.0), ks);
        CHECK(c.measures == std::vector<double>{1.0, 1.0, 1.0, 0.0, 0.0});

        // u(x) = x: phi(k) = 1 - k.
        const std::vector<double> grid{0.05, 0.123, 0.37, 0.5, 0.81, 0.999};
        const DistributionCurve lin = distribution_function(m, coordinate(m, 0), grid);
        for (std::size_t i = 0; i < grid.size(); ++i)
            CHECK(lin.measures[i] == doctest::Approx(1.0 - grid[i]).epsilon(1e-14));

        const Mesh g = build_triangulated_sphere(2, 1.0);
        std::mt19937_64 rng(3);
        for (int t = 0; t < 10; ++t) {
            const DiscreteFunction r = random_function(g, static_cast<std::size_t>(t), rng);
            const DistributionCurve d = distribution_function(g, r, default_thresholds(r.values()));
            CHECK(d.measures.front() <= g.total_volume() * (1.0 + 1e-14));
            for (std::size_t i = 1; i < d.measures.size(); ++i)
                CHECK(d.measures[i] <= d.measures[i - 1]);
        }
        CHECK_THROWS_AS(distribution_function(m, coordinate(m, 0), std::vector<double>{0.5, 0.4}), DomainError);
        CHECK_THROWS_AS(distribution_function(m, coordinate(m, 0), std::vector<double>{0.0, 0.4}), DomainError);
    }

    TEST_CASE("distribution of a tilted plane on a triangle mesh")
    {
        // u = x + y on the unit square: meas{u > k} = 1 - k^2 / 2 for k <= 1.
        const Mesh m = build_rectangle_mesh(7, 5, 1.0, 1.0);
        std::vector<double> v(m.num_vertices());
        for (std::size_t i = 0; i < v.size(); ++i)
            v[i] = m.vertex(i)[0] + m.vertex(i)[1];
        const std::vector<double> ks{0.2, 0.5, 0.9, 1.3};
        const DistributionCurve c = distribution_function(m, DiscreteFunction(m, v), ks);
        for (std::size_t i = 0; i < 3; ++i)
            CHECK(c.measures[i] == doctest::Approx(1.0 - 0.5 * ks[i] * ks[i]).epsilon(1e-13));
        CHECK(c.measures[3] == doctest::Approx(0.5 * 0.7 * 0.7).epsilon(1e-13));
    }

    TEST_CASE("Marcinkiewicz quasi-norm")
    {
        DistributionCurve c;
        for (int i = 0; i < 200; ++i) {
            const double k = std::pow(10.0, -2.0 + 4.0 * i / 199.0);
            c.thresholds.push_back(k);
            c.measures.push_back(std::min(1.0, std::pow(k, -2.0)));
        }
        CHECK(marcinkiewicz_norm(c, 2.0) == doctest::Approx(1.0).epsilon(1e-12));

        const Mesh m = build_interval_mesh(8, 1.0);
        const DiscreteFunction z = DiscreteFunction::zeros(m);
        CHECK(default_thresholds(z.values()).empty());
        DistributionCurve zc = distribution_function(m, z, std::vector<double>{0.1, 1.0});
        CHECK(marcinkiewicz_norm(zc, 1.5) == 0.0);
        CHECK_THROWS_AS(marcinkiewicz_norm(DistributionCurve{}, 1.0), DomainError);
    }

    TEST_CASE("layer cake identity")
    {
        const Mesh m = build_interval_mesh(32, 1.0);
        for (double c : {-2.5, 0.75, 3.0}) {
            const LayerCake lc = layer_cake_check(m, DiscreteFunction::constant(m, c), 1.5, 10);
            CHECK(lc.lhs == doctest::Approx(std::pow(std::abs(c), 1.5)).epsilon(1e-14));
            CHECK(lc.relative_gap() <= 1e-12);
        }
        const LayerCake zero = layer_cake_check(m, DiscreteFunction::zeros(m), 2.0, 10);
        CHECK(zero.lhs == 0.0);
        CHECK(zero.rhs == 0.0);
        CHECK(zero.relative_gap() == 0.0);

        const LayerCake lin = layer_cake_check(m, coordinate(m, 0), 2.0, 10000);
        CHECK(lin.lhs == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
        CHECK(lin.rhs == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
        CHECK(lin.relative_gap() <= 1e-6);
    }

    TEST_CASE("tail exponent fit")
    {
        DistributionCurve c;
        for (int i = 0; i < 30; ++i) {
            const double k = std::pow(10.0, i / 10.0);
            c.thresholds.push_back(k);
            c.measures.push_back(3.0 * std::pow(k, -1.5));
        }
        const TailFit f = tail_exponent_fit(c, 1.0, 1000.0);
        CHECK(f.slope == doctest::Approx(-1.5).epsilon(1e-12));
        CHECK(f.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
        CHECK(f.r_squared == doctest::Approx(1.0).epsilon(1e-12));

        for (double& m : c.measures)
            m = 0.25;
        CHECK(std::abs(tail_exponent_fit(c, 1.0, 1000.0).slope) < 1e-14);

        DistributionCurve shortc{{1.0, 2.0, 3.0}, {1.0, 0.5, 0.2}};
        CHECK_THROWS_AS(tail_exponent_fit(shortc, 0.5, 5.0), DegenerateInput);
    }

    TEST_CASE("Poincare ratio")
    {
        const Mesh m = build_interval_mesh(40, 1.0);
        // u = x: ||x - 1/2||_2 = 1/sqrt(12), ||u'||_2 = 1.
        CHECK(poincare_ratio(m, coordinate(m, 0), 2.0) == doctest::Approx(1.0 / (2.0 * std::sqrt(3.0))).epsilon(1e-12));

        const Mesh g = build_flat_torus_mesh(6, 5, 1.0, 1.0);
        std::mt19937_64 rng(11);
        const DiscreteFunction u = random_function(g, 0, rng);
        const double base = poincare_ratio(g, u, 3.0);
        CHECK(poincare_ratio(g, u + DiscreteFunction::constant(g, 7.0), 3.0) == doctest::Approx(base).epsilon(1e-10));
        CHECK(poincare_ratio(g, -2.5 * u, 3.0) == doctest::Approx(base).epsilon(1e-10));
        CHECK_THROWS_AS(poincare_ratio(g, DiscreteFunction::constant(g, 1.0), 2.0), DegenerateInput);
    }
}
