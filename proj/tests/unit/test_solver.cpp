#include "plap/data.hpp"
#include "plap/error.hpp"
#include "plap/solver.hpp"
#include "plap/sweeps.hpp"

#include <doctest.h>

#include <cmath>

using namespace plap;

namespace {

SolverConfig config_for(double p, double tol = 1e-10)
{
    SolverConfig c;
    c.p = p;
    c.grad_tol = tol;
    return c;
}

// Random values that vanish on Dirichlet nodes.
DiscreteFunction feasible_random(const Mesh& m, std::mt19937_64& rng, double scale)
{
    std::vector<double> v(m.num_vertices());
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = m.is_boundary(static_cast<Index>(i)) ? 0.0 : scale * (2.0 * uniform01(rng) - 1.0);
    return {m, v};
}

} // namespace

TEST_SUITE("solver")
{
    TEST_CASE("config validation")
    {
        SolverConfig c;
        c.p = 0.9;
        CHECK_THROWS_WITH_AS(c.validate(), "p must exceed 1", DomainError);
        c = {};
        c.grad_tol = 0.0;
        CHECK_THROWS_AS(c.validate(), DomainError);
        c = {};
        c.epsilon = -1.0;
        CHECK_THROWS_AS(c.validate(), DomainError);
        c = {};
        c.max_iter = 0;
        CHECK_THROWS_AS(c.validate(), DomainError);

        c = {};
        c.bc_mode = BoundaryMode::zero_mean;
        CHECK_THROWS_AS(c.validate_for(build_interval_mesh(4, 1.0)), DomainError);
        CHECK_NOTHROW(c.validate_for(build_flat_torus_mesh(4, 4, 1.0, 1.0)));
        c.bc_mode = BoundaryMode::dirichlet_zero;
        CHECK_THROWS_AS(c.validate_for(build_triangulated_sphere(1, 1.0)), DomainError);
    }

    TEST_CASE("energy and its gradient at trivial points")
    {
        const Mesh m = build_rectangle_mesh(4, 4, 1.0, 1.0);
        const DiscreteFunction z = DiscreteFunction::zeros(m);
        CHECK(energy(m, z, z, config_for(1.7)) == 0.0);
        const DiscreteFunction g0 = energy_gradient(m, z, z, config_for(3.0));
        for (double g : g0.values())
            CHECK(g == 0.0);
        const SolveOutcome o = solve_weak(m, z, config_for(1.5));
        CHECK(o.converged);
        CHECK(o.solution.max_abs() == 0.0);
    }

    TEST_CASE("load vector integrates the P1 data exactly")
    {
        const Mesh m = build_triangulated_sphere(2, 1.0);
        std::vector<double> v(m.num_vertices());
        for (std::size_t i = 0; i < v.size(); ++i)
            v[i] = m.vertex(i)[2];
        SolverConfig c = config_for(2.0);
        c.bc_mode = BoundaryMode::zero_mean;
        // Sum of b_i is the integral of f_h; z is odd on the icosphere.
        double sum = 0.0;
        for (double b : load_vector(m, DiscreteFunction(m, v), c))
            sum += b;
        CHECK(std::abs(sum) < 1e-15);

        const Mesh seg = build_interval_mesh(8, 1.0);
        double total = 0.0;
        for (double b : load_vector(seg, DiscreteFunction::constant(seg, 2.0), config_for(2.0)))
            total += b;
        CHECK(total == doctest::Approx(2.0).epsilon(1e-14));
    }

    TEST_CASE("gradient matches central differences of the energy")
    {
        std::mt19937_64 rng(42);
        for (double p : {1.5, 2.0, 3.0}) {
            for (const Mesh& m : {build_interval_mesh(12, 1.0), build_rectangle_mesh(5, 4, 1.0, 1.0)}) {
                SolverConfig c = config_for(p);
                c.epsilon = p < 2.0 ? 1e-3 : 0.0;
                const DiscreteFunction f = feasible_random(m, rng, 1.0);
                for (int trial = 0; trial < 5; ++trial) {
                    const DiscreteFunction u = feasible_random(m, rng, 1.0);
                    const DiscreteFunction d = feasible_random(m, rng, 1.0);
                    const double h = 1e-5;
                    const double fd = (energy(m, u + h * d, f, c) - energy(m, u - h * d, f, c)) / (2.0 * h);
                    const DiscreteFunction g = energy_gradient(m, u, f, c);
                    double dot = 0.0;
                    for (std::size_t i = 0; i < g.size(); ++i)
                        dot += g[i] * d[i];
                    CHECK(std::abs(fd - dot) <= 1e-6 * std::max(1.0, std::abs(dot)));
                }
            }
        }
    }

    TEST_CASE("p = 2 gradient is affine in u")
    {
        std::mt19937_64 rng(5);
        const Mesh m = build_rectangle_mesh(6, 6, 1.0, 1.0);
        const SolverConfig c = config_for(2.0);
        const DiscreteFunction z = DiscreteFunction::zeros(m);
        const DiscreteFunction u = feasible_random(m, rng, 1.0), v = feasible_random(m, rng, 1.0);
        const DiscreteFunction lhs = energy_gradient(m, 2.0 * u + v, z, c);
        const DiscreteFunction rhs = 2.0 * energy_gradient(m, u, z, c) + energy_gradient(m, v, z, c);
        CHECK((lhs - rhs).max_abs() < 1e-12);
    }

    TEST_CASE("closed-form solutions on the unit interval")
    {
        const Mesh m = build_interval_mesh(256, 1.0);
        const DiscreteFunction f = DiscreteFunction::constant(m, 1.0);
        for (double p : {2.0, 1.5, 3.0, 1.3, 4.0}) {
            CAPTURE(p);
            const SolveOutcome o = solve_weak(m, f, config_for(p));
            REQUIRE(o.converged);
            const IntervalErrors e = interval_errors(m, o.solution, p, 1.0);
            CHECK(e.nodal_linf <= (p == 2.0 ? 1e-12 : 1e-4));
            CHECK(o.final_residual <= 1e-10);
            CHECK(o.solution[128] > 0.0);
        }
        CHECK(interval_closed_form(0.5, 2.0, 1.0, 1.0) == doctest::Approx(0.125));
        CHECK(interval_closed_form(0.5, 1.5, 1.0, 1.0) == doctest::Approx(1.0 / 24.0));
    }

    TEST_CASE("energy trace decreases and ends at the minimum")
    {
        std::mt19937_64 rng(9);
        const Mesh m = build_rectangle_mesh(12, 12, 1.0, 1.0);
        for (double p : {1.5, 3.0}) {
            const SolverConfig c = config_for(p);
            const DiscreteFunction f = sin_datum(m, 1.0) + DiscreteFunction::constant(m, 0.5);
            const SolveOutcome o = solve_weak(m, f, c);
            REQUIRE(o.converged);
            if (p > 2.0)
                for (std::size_t i = 1; i < o.energy_trace.size(); ++i)
                    CHECK(o.energy_trace[i] <= o.energy_trace[i - 1] + 1e-15 * std::abs(o.energy_trace[i - 1]));
            const double jmin = energy(m, o.solution, f, c);
            for (int trial = 0; trial < 100; ++trial) {
                const DiscreteFunction u = o.solution + feasible_random(m, rng, 0.05 * o.solution.max_abs());
                CHECK(energy(m, u, f, c) >= jmin);
            }
        }
    }

    TEST_CASE("homogeneity of the solution map")
    {
        const Mesh m = build_rectangle_mesh(10, 10, 1.0, 1.0);
        const SolverConfig c = config_for(3.0, 1e-12);
        const DiscreteFunction f = sin_datum(m, 1.0) + DiscreteFunction::constant(m, 1.0);
        const SolveOutcome a = solve_weak(m, f, c);
        const SolveOutcome b = solve_weak(m, 2.0 * f, c);
        REQUIRE(a.converged);
        REQUIRE(b.converged);
        const DiscreteFunction scaled = std::pow(2.0, 1.0 / 2.0) * a.solution;
        CHECK((b.solution - scaled).max_abs() <= 1e-9 * scaled.max_abs());
    }

    TEST_CASE("zero_mean solve on a closed surface")
    {
        const Mesh m = build_triangulated_sphere(2, 1.0);
        std::vector<double> v(m.num_vertices());
        for (std::size_t i = 0; i < v.size(); ++i)
            v[i] = m.vertex(i)[2];
        SolverConfig c = config_for(2.0);
        c.bc_mode = BoundaryMode::zero_mean;
        const SolveOutcome o = solve_weak(m, DiscreteFunction(m, v), c);
        REQUIRE(o.converged);
        double mean = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i)
            mean += m.lumped_mass()[i] * o.solution[i];
        CHECK(std::abs(mean) < 1e-12);
        // z is a first spherical harmonic: -Delta z = 2 z on the unit sphere.
        for (std::size_t i = 0; i < v.size(); ++i)
            CHECK(o.solution[i] == doctest::Approx(0.5 * v[i]).epsilon(0.05).scale(1.0));

        std::vector<double> ones(m.num_vertices(), 1.0);
        CHECK_THROWS_AS(solve_weak(m, DiscreteFunction(m, ones), c), DomainError);
    }

    TEST_CASE("semilinear fixed point")
    {
        const Mesh m = build_interval_mesh(128, 1.0);
        const DiscreteFunction h = DiscreteFunction::constant(m, 1.0);
        const SolverConfig c = config_for(2.0, 1e-11);

        const SolveOutcome a = solve_semilinear(m, h, 1.0, 0.5, c);
        REQUIRE(a.converged);
        for (double x : a.solution.values())
            CHECK(x >= 0.0);

        // Start far above the solution.
        const SolveOutcome b = solve_semilinear(m, h, 1.0, 0.5, c, 10.0 * a.solution);
        REQUIRE(b.converged);
        CHECK((a.solution - b.solution).max_abs() <= 10.0 * c.grad_tol);

        // lambda -> mu lambda scales u by mu^(1/(p-1-q)).
        const SolveOutcome s = solve_semilinear(m, h, 3.0, 0.5, c);
        REQUIRE(s.converged);
        const DiscreteFunction expect = std::pow(3.0, 1.0 / 0.5) * a.solution;
        CHECK((s.solution - expect).max_abs() <= 1e-8 * expect.max_abs());

        const SolveOutcome zero = solve_semilinear(m, DiscreteFunction::zeros(m), 1.0, 0.5, c);
        CHECK(zero.solution.max_abs() == 0.0);

        CHECK_THROWS_AS(solve_semilinear(m, h, 1.0, 1.0, c), DomainError);
        CHECK_THROWS_AS(solve_semilinear(m, -1.0 * h, 1.0, 0.5, c), DomainError);
        CHECK_THROWS_AS(solve_semilinear(m, h, -1.0, 0.5, c), DomainError);
    }
}
