#include "plap/data.hpp"
#include "plap/entropy.hpp"
#include "plap/error.hpp"
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

double l1(const Mesh& m, const DiscreteFunction& f)
{
    return abs_integral(m, f);
}

} // namespace

TEST_SUITE("entropy")
{
    TEST_CASE("schedule validation")
    {
        ApproximationSchedule s;
        s.levels = {1.0};
        CHECK_THROWS_AS(s.validate(), DomainError);
        s.levels = {2.0, 1.0};
        CHECK_THROWS_AS(s.validate(), DomainError);
        s.levels = {0.0, 1.0};
        CHECK_THROWS_AS(s.validate(), DomainError);
        s.levels = {1.0, INFINITY};
        CHECK_THROWS_AS(s.validate(), DomainError);
        s.levels = {1.0, 2.0};
        CHECK_NOTHROW(s.validate());
    }

    TEST_CASE("truncated data sequence")
    {
        const Mesh m = build_rectangle_mesh(8, 8, 1.0, 1.0);
        const DiscreteFunction f = spike_datum(m, center_vertex(m)) + DiscreteFunction::constant(m, 0.5);
        const double top = f.max_abs();
        ApproximationSchedule s{{1.0, 10.0, top, 2.0 * top}, ScheduleMode::truncate_data};
        const auto seq = make_data_sequence(m, f, s);
        REQUIRE(seq.size() == 4);
        for (std::size_t i = 0; i < f.size(); ++i) {
            CHECK(seq[2][i] == f[i]);
            CHECK(seq[3][i] == f[i]);
            if (f[i] < 1.0)
                CHECK(seq[0][i] == f[i]);
        }
        CHECK(seq[0][static_cast<std::size_t>(center_vertex(m))] == 1.0);
        double previous = INFINITY;
        for (const auto& fn : seq) {
            const double err = l1(m, fn - f);
            CHECK(err <= previous);
            previous = err;
        }
    }

    TEST_CASE("clip and rescale preserves the lumped integral")
    {
        const Mesh m = build_flat_torus_mesh(12, 12, 1.0, 1.0);
        const Index c = center_vertex(m);
        DiscreteFunction f = spike_datum(m, c);
        // Remove the mean so the data is compatible on the closed surface.
        f -= DiscreteFunction::constant(m, 1.0 / m.total_volume());
        ApproximationSchedule s{{5.0, 20.0}, ScheduleMode::clip_and_rescale};
        const auto seq = make_data_sequence(m, f, s);
        for (const auto& fn : seq) {
            double lumped = 0.0;
            for (std::size_t i = 0; i < fn.size(); ++i)
                lumped += m.lumped_mass()[i] * fn[i];
            CHECK(std::abs(lumped) < 1e-12);
            CHECK(fn.max_abs() <= 20.0);
        }
    }

    TEST_CASE("residual identities")
    {
        const Mesh m = build_rectangle_mesh(10, 10, 1.0, 1.0);
        const DiscreteFunction f = sin_datum(m, 1.0) + DiscreteFunction::constant(m, 1.0);
        const SolverConfig cfg = config_for(1.7);
        const DiscreteFunction u = solve_weak(m, f, cfg).solution;
        const double k = 0.3 * u.max_abs();

        for (ResidualMode mode : {ResidualMode::consistent, ResidualMode::exact_geometry})
            CHECK(entropy_residual(m, u, f, u, k, 1.7, mode) == 0.0);

        // phi = 0 and f = 0 leave the restricted gradient energy.
        const DiscreteFunction zero = DiscreteFunction::zeros(m);
        CHECK(entropy_residual(m, u, zero, zero, k, 1.7, ResidualMode::exact_geometry) ==
              doctest::Approx(restricted_gradient_energy(m, u, k, 1.7)).epsilon(1e-12));

        // Without active truncation the consistent residual is <grad J(u), u>.
        std::mt19937_64 rng(4);
        std::vector<double> v(m.num_vertices());
        for (std::size_t i = 0; i < v.size(); ++i)
            v[i] = m.is_boundary(static_cast<Index>(i)) ? 0.0 : uniform01(rng);
        const DiscreteFunction w(m, v);
        const DiscreteFunction g = energy_gradient(m, w, f, cfg);
        double pairing = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i)
            pairing += g[i] * v[i];
        CHECK(entropy_residual(m, w, f, zero, 2.0, 1.7) == doctest::Approx(pairing).epsilon(1e-12));
        CHECK_THROWS_AS(entropy_residual(m, w, f, zero, 0.0, 1.7), DomainError);
    }

    TEST_CASE("certificate of bounded data and of perturbed solutions")
    {
        const Mesh m = build_rectangle_mesh(16, 16, 1.0, 1.0);
        const DiscreteFunction f = sin_datum(m, 1.0) + DiscreteFunction::constant(m, 1.0);
        for (double p : {1.5, 2.0, 3.0}) {
            CAPTURE(p);
            const SolverConfig cfg = config_for(p, 1e-10);
            const SolveOutcome o = solve_weak(m, f, cfg);
            REQUIRE(o.converged);
            const TestBank bank = default_test_bank(m, o.solution);
            CHECK(bank.size() == 5);
            const auto ks = default_certificate_levels(o.solution);
            CHECK(ks.size() == 5);
            const CertificateSummary good = entropy_certificate(m, o.solution, f, ks, bank, p);
            CHECK(good.max_scaled <= 50.0 * cfg.grad_tol);

            std::mt19937_64 rng(77);
            std::vector<double> noisy(o.solution.values().begin(), o.solution.values().end());
            for (std::size_t i = 0; i < noisy.size(); ++i)
                if (!m.is_boundary(static_cast<Index>(i)))
                    noisy[i] += 1e-3 * (2.0 * uniform01(rng) - 1.0);
            const CertificateSummary bad = entropy_certificate(m, DiscreteFunction(m, noisy), f, ks, bank, p);
            CHECK(bad.max_abs >= 10.0 * good.max_abs);

            // A larger bank never lowers the maximum.
            TestBank doubled = bank;
            for (std::size_t t = 0; t < bank.size(); ++t) {
                doubled.names.push_back(bank.names[t] + "/2");
                doubled.functions.push_back(0.5 * bank.functions[t]);
            }
            CHECK(entropy_certificate(m, o.solution, f, ks, doubled, p).max_abs >= good.max_abs);
        }
    }

    TEST_CASE("a-priori ratio")
    {
        const Mesh m = build_interval_mesh(200, 1.0);
        const DiscreteFunction f = DiscreteFunction::constant(m, 1.0);
        const SolveOutcome o = solve_weak(m, f, config_for(2.0));
        const auto ks = default_apriori_levels(o.solution);
        CHECK(ks.size() == 16);
        const AprioriCheck a = apriori_estimate_check(m, o.solution, f, ks, 2.0);
        CHECK(a.max_ratio <= 1.0);
        for (double r : a.restricted_ratios)
            CHECK(r <= 1.0 + 1e-12);

        // Beyond max|u| the numerator saturates and the ratio falls like 1/k.
        const double top = o.solution.max_abs();
        const std::vector<double> big{top, 2.0 * top, 4.0 * top};
        const AprioriCheck sat = apriori_estimate_check(m, o.solution, f, big, 2.0);
        const double energy = std::pow(grad_lp_norm(m, gradient(m, o.solution), 2.0), 2.0);
        for (std::size_t i = 0; i < big.size(); ++i)
            CHECK(sat.ratios[i] == doctest::Approx(energy / (big[i] * 1.0)).epsilon(1e-12));
        CHECK(sat.ratios[2] < sat.ratios[1]);

        const AprioriCheck z = apriori_estimate_check(m, DiscreteFunction::zeros(m), f, big, 2.0);
        CHECK(z.max_ratio == 0.0);
        CHECK_THROWS_AS(apriori_estimate_check(m, o.solution, DiscreteFunction::zeros(m), big, 2.0),
                        DegenerateInput);
    }

    TEST_CASE("reference decay exponents")
    {
        CHECK(*u_decay_reference(2, 1.5) == doctest::Approx(2.0));
        CHECK(*u_decay_reference(2, 1.8) == doctest::Approx(8.0));
        CHECK(*grad_decay_reference(2, 1.5) == doctest::Approx(1.0));
        CHECK(*grad_decay_reference(3, 2.0) == doctest::Approx(1.5));
        CHECK_FALSE(u_decay_reference(2, 2.0).has_value());
        CHECK_FALSE(grad_decay_reference(1, 1.5).has_value());
    }

    TEST_CASE("decay checks report missing tails")
    {
        const Mesh m = build_rectangle_mesh(8, 8, 1.0, 1.0);
        std::vector<double> v(m.num_vertices());
        for (std::size_t i = 0; i < v.size(); ++i)
            v[i] = 2.0 * m.vertex(i)[0] + m.vertex(i)[1];
        const DecayCheck g = grad_decay_check(m, DiscreteFunction(m, v), 1.5);
        CHECK(g.applicable);
        CHECK_FALSE(g.has_tail);
        CHECK(g.note.find("no tail") != std::string::npos);

        const DecayCheck z = u_decay_check(m, DiscreteFunction::zeros(m), 1.5);
        CHECK_FALSE(z.has_tail);
        CHECK_FALSE(u_decay_check(m, DiscreteFunction(m, v), 2.5).applicable);
    }

    TEST_CASE("Cauchy and truncation tables")
    {
        const Mesh m = build_rectangle_mesh(8, 8, 1.0, 1.0);
        const DiscreteFunction u = solve_weak(m, DiscreteFunction::constant(m, 1.0), config_for(2.0)).solution;
        const std::vector<DiscreteFunction> same{u, u, u};
        const std::vector<double> ts{0.01, 0.1, 1.0};
        const CauchyTable c = cauchy_in_measure(m, same, ts);
        CHECK(c.pairs.size() == 3);
        for (const auto& row : c.measures)
            for (double x : row)
                CHECK(x == 0.0);
        const TruncationTable t = truncation_convergence(m, same, ts, 2.0);
        for (const auto& row : t.gaps)
            for (double x : row)
                CHECK(x == 0.0);

        const std::vector<DiscreteFunction> diff{u, 3.0 * u};
        const CauchyTable d = cauchy_in_measure(m, diff, ts);
        for (double x : d.measures[0])
            CHECK(x <= m.total_volume());
        CHECK_THROWS_AS(cauchy_in_measure(m, std::vector<DiscreteFunction>{u}, ts), DomainError);
    }

    TEST_CASE("approximation pipeline on a small spike benchmark")
    {
        const Mesh m = build_rectangle_mesh(40, 40, 1.0, 1.0);
        const DiscreteFunction f = spike_datum(m, center_vertex(m));
        CHECK(mean_value(m, f) * m.total_volume() == doctest::Approx(1.0).epsilon(1e-12));
        const double top = f.max_abs();
        const ApproximationSchedule s{{top / 64.0, top / 8.0, top}, ScheduleMode::truncate_data};
        const EntropyReport r = run_approximation(m, f, s, config_for(1.5, 1e-9));
        REQUIRE(r.stages.size() == 3);
        CHECK(r.all_converged());
        CHECK(r.max_apriori_ratio() <= 1.05);
        CHECK(r.stages.back().data_error == 0.0);
        CHECK(r.stages.back().certificate.max_scaled <= 50.0 * 1e-9);
        CHECK(r.u_decay.applicable);
        CHECK(r.grad_decay.applicable);
        CHECK(r.test_names.size() == 5);

        // Monotone data gives monotone stage solutions.
        for (std::size_t st = 1; st < r.stages.size(); ++st)
            for (std::size_t i = 0; i < f.size(); ++i)
                CHECK(r.stages[st].outcome.solution[i] >= r.stages[st - 1].outcome.solution[i] - 1e-12);

        // pairs (0, 1), (0, 2), (1, 2): the gaps form a metric.
        const auto& gaps = r.truncation.gaps;
        REQUIRE(r.truncation.pairs.size() == 3);
        for (std::size_t k = 0; k < r.truncation.k_grid.size(); ++k) {
            CHECK(gaps[0][k] >= 0.0);
            CHECK(gaps[1][k] <= gaps[0][k] + gaps[2][k] + 1e-12);
        }
    }

    TEST_CASE("uniqueness cross-check")
    {
        const Mesh m = build_rectangle_mesh(24, 24, 1.0, 1.0);
        const DiscreteFunction f = spike_datum(m, center_vertex(m));
        const double top = f.max_abs();
        const ApproximationSchedule a{{2.0, 8.0, top}, ScheduleMode::truncate_data};
        const ApproximationSchedule b{{3.0, 12.0, 1.5 * top}, ScheduleMode::truncate_data};
        for (double p : {2.0, 1.5}) {
            const UniquenessGap g = uniqueness_crosscheck(m, f, a, b, config_for(p, 1e-10));
            CHECK(g.converged);
            CHECK(g.l1_gap <= (p == 2.0 ? 1e-8 : 1e-3) * g.l1_reference);
            const UniquenessGap same = uniqueness_crosscheck(m, f, a, a, config_for(p, 1e-10));
            CHECK(same.l1_gap <= 1e-8 * same.l1_reference);
        }
    }
}
