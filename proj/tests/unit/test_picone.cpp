#include "plap/error.hpp"
#include "plap/picone.hpp"
#include "plap/sweeps.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace plap;

namespace {

DiscreteFunction random_positive(const Mesh& m, std::mt19937_64& rng, double lo)
{
    std::vector<double> v(m.num_vertices());
    for (double& x : v)
        x = lo + uniform01(rng);
    return {m, v};
}

} // namespace

TEST_SUITE("picone")
{
    TEST_CASE("L vanishes when u is proportional to v")
    {
        std::mt19937_64 rng(12);
        const Mesh m = build_flat_torus_mesh(6, 6, 1.0, 1.0);
        const DiscreteFunction v = random_positive(m, rng, 0.5);
        for (double p : {1.3, 2.0, 4.0})
            for (double k : {1.0, 2.0}) {
                const PiconeField f = picone_pointwise(m, k * v, v, p, PiconeMode::chain_rule);
                CHECK(f.valid_count() == m.num_cells());
                CHECK(f.max_abs_l() <= 1e-12);
            }
    }

    TEST_CASE("chain-rule identity on random positive pairs")
    {
        std::mt19937_64 rng(99);
        const Mesh m = build_flat_torus_mesh(8, 8, 1.0, 1.0);
        for (int trial = 0; trial < 50; ++trial) {
            const DiscreteFunction u = random_positive(m, rng, 0.0);
            const DiscreteFunction v = random_positive(m, rng, 0.5);
            const PiconeField f = picone_pointwise(m, u, v, 3.0, PiconeMode::chain_rule);
            CHECK(f.min_l() >= -1e-12);
            CHECK(f.max_identity_gap() <= 1e-10);
        }
    }

    TEST_CASE("interpolated mode differs at first order only")
    {
        std::mt19937_64 rng(5);
        double previous = INFINITY;
        for (int n : {8, 16, 32}) {
            const Mesh m = build_rectangle_mesh(n, n, 1.0, 1.0);
            std::vector<double> u(m.num_vertices()), v(m.num_vertices());
            for (std::size_t i = 0; i < u.size(); ++i) {
                const double x = m.vertex(i)[0], y = m.vertex(i)[1];
                u[i] = 1.0 + x * y;
                v[i] = 1.0 + 0.5 * std::sin(3.0 * x + y);
            }
            const PiconeField f =
                picone_pointwise(m, DiscreteFunction(m, u), DiscreteFunction(m, v), 2.5, PiconeMode::interpolated);
            const double gap = f.identity_gap_l1(m);
            CHECK(gap < previous);
            previous = gap;
        }
    }

    TEST_CASE("positivity floor marks cells invalid")
    {
        const Mesh m = build_interval_mesh(4, 1.0);
        const DiscreteFunction u(m, {0.0, 1.0, 1.0, 1.0, 0.0});
        const DiscreteFunction v(m, {0.0, 1.0, 1.0, 1.0, 0.0});
        const PiconeField f = picone_pointwise(m, u, v, 2.0, PiconeMode::chain_rule);
        CHECK(f.valid_count() == 2);
        CHECK(f.valid == std::vector<unsigned char>{0, 1, 1, 0});
        CHECK(f.l_values[0] == 0.0);
        CHECK_THROWS_AS(picone_pointwise(m, -1.0 * u, v, 2.0, PiconeMode::chain_rule), DomainError);
    }

    TEST_CASE("integral form")
    {
        const Mesh m = build_interval_mesh(64, 1.0);
        SolverConfig cfg;
        cfg.p = 2.0;
        const DiscreteFunction v = solve_weak(m, DiscreteFunction::constant(m, 1.0), cfg).solution;

        const PiconeIntegral zero = picone_integral(m, DiscreteFunction::zeros(m), v, 2.0);
        CHECK(zero.lhs == 0.0);
        CHECK(zero.rhs == 0.0);

        const PiconeIntegral same = picone_integral(m, v, v, 2.0);
        CHECK(std::abs(same.slack()) <= 1e-14 * (1.0 + same.lhs));

        std::mt19937_64 rng(1);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<double> u(m.num_vertices(), 0.0);
            for (std::size_t i = 1; i + 1 < u.size(); ++i)
                u[i] = uniform01(rng);
            const PiconeIntegral pi = picone_integral(m, DiscreteFunction(m, u), v, 2.0);
            CHECK(pi.slack() >= -1e-8 * (1.0 + pi.lhs));
        }

        const DiscreteFunction ones = DiscreteFunction::constant(m, 1.0);
        CHECK_THROWS_AS(picone_integral(m, ones, v, 2.0), DomainError);
    }

    TEST_CASE("comparison of sub- and supersolutions")
    {
        const Mesh m = build_interval_mesh(64, 1.0);
        SolverConfig cfg;
        cfg.p = 2.0;
        cfg.grad_tol = 1e-10;
        const DiscreteFunction h = DiscreteFunction::constant(m, 1.0);
        const ComparisonReport r = comparison_check(m, h, 1.0, 0.5, 0.5, cfg);
        CHECK(r.converged);
        CHECK(r.violations == 0);
        CHECK(r.sub_residual_violations == 0);
        CHECK(r.super_residual_violations == 0);
        CHECK(r.from_sub_gap <= 10.0 * cfg.grad_tol);

        const ComparisonReport eq = comparison_check(m, h, 1.0, 0.5, 1.0, cfg);
        CHECK(eq.violations == 0);
        CHECK(eq.worst_gap == 0.0);

        // Close to the q = p - 1 limit the fixed point slows down but stays ordered.
        cfg.max_iter = 400;
        const ComparisonReport stress = comparison_check(m, h, 5.0, 0.9, 0.5, cfg);
        CHECK(stress.converged);
        CHECK(stress.violations == 0);
        CHECK(stress.iterations > r.iterations);
        CHECK_THROWS_AS(comparison_check(m, h, 1.0, 0.5, 1.5, cfg), DomainError);
    }

    TEST_CASE("random sweep helper")
    {
        std::mt19937_64 rng(3);
        const Mesh m = build_rectangle_mesh(3, 3, 1.0, 1.0);
        const PiconeSweep s = picone_random_sweep(m, 1.3, 50, 0.5, rng);
        CHECK(s.passed());
        CHECK(s.cells_checked == 50 * m.num_cells());
        CHECK_THROWS_AS(picone_random_sweep(m, 2.0, 1, 0.0, rng), DomainError);
    }

    TEST_CASE("CSV layout")
    {
        const Mesh m = build_interval_mesh(2, 1.0);
        const DiscreteFunction u(m, {0.5, 1.0, 0.5});
        const PiconeField f = picone_pointwise(m, u, u, 2.0, PiconeMode::chain_rule);
        const std::string csv = format_picone_csv(f);
        CHECK(csv.rfind("cell_index,L,R,valid\n", 0) == 0);
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
    }
}
