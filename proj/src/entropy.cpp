#include "plap/entropy.hpp"

#include "plap/cell_pieces.hpp"
#include "plap/data.hpp"
#include "plap/error.hpp"

#include <algorithm>
#include <cmath>

namespace plap {

void ApproximationSchedule::validate() const
{
    if (levels.size() < 2)
        throw DomainError("schedule needs at least 2 levels");
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (!(levels[i] > 0.0) || !std::isfinite(levels[i]))
            throw DomainError("schedule levels must be positive and finite");
        if (i > 0 && !(levels[i] > levels[i - 1]))
            throw DomainError("schedule levels must be strictly increasing");
    }
}

namespace {

double lumped_integral(const Mesh& mesh, std::span<const double> v)
{
    const auto mass = mesh.lumped_mass();
    CompensatedSum s;
    for (std::size_t i = 0; i < v.size(); ++i)
        s.add(mass[i] * v[i]);
    return s.value();
}

DiscreteFunction clip_and_rescale(const Mesh& mesh, const DiscreteFunction& f, double level)
{
    std::vector<double> pos(f.size()), neg(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double c = truncate_value(f[i], level);
        pos[i] = std::max(c, 0.0);
        neg[i] = std::max(-c, 0.0);
    }
    const double target = lumped_integral(mesh, f.values());
    const double P = lumped_integral(mesh, pos);
    const double N = lumped_integral(mesh, neg);
    double alpha = 1.0, beta = 1.0;
    if (P - N > target && P > 0.0)
        alpha = std::clamp((target + N) / P, 0.0, 1.0);
    else if (P - N < target && N > 0.0)
        beta = std::clamp((P - target) / N, 0.0, 1.0);
    std::vector<double> out(f.size());
    for (std::size_t i = 0; i < f.size(); ++i)
        out[i] = alpha * pos[i] - beta * neg[i];
    return f.with_values(std::move(out));
}

Vec3 flux(const Vec3& g, double p)
{
    const double n = norm(g);
    const double a = n > 0.0 ? std::pow(n, p - 2.0) : 0.0;
    return {a * g[0], a * g[1], a * g[2]};
}

std::vector<double> consistent_load(const Mesh& mesh, const DiscreteFunction& f)
{
    SolverConfig plain;
    return load_vector(mesh, f, plain);
}

void require_boundary_zero(const Mesh& mesh, const DiscreteFunction& phi)
{
    for (Index v : mesh.boundary_nodes())
        if (phi[static_cast<std::size_t>(v)] != 0.0)
            throw DomainError("test function must vanish on boundary nodes");
}

std::vector<LevelPair> all_pairs(std::size_t n)
{
    std::vector<LevelPair> pairs;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b)
            pairs.push_back({a, b});
    return pairs;
}

std::vector<SolveOutcome> solve_stages(const Mesh& mesh, std::span<const DiscreteFunction> data,
                                       const SolverConfig& config, bool warm_start)
{
    std::vector<SolveOutcome> out;
    for (const DiscreteFunction& fn : data) {
        std::optional<DiscreteFunction> initial;
        if (warm_start && !out.empty() && out.back().converged)
            initial = out.back().solution;
        out.push_back(solve_weak(mesh, fn, config, initial));
    }
    return out;
}

double max_gradient(const Mesh& mesh, const DiscreteFunction& u)
{
    double m = 0.0;
    for (double x : gradient(mesh, u).magnitudes())
        m = std::max(m, x);
    return m;
}

} // namespace

std::vector<DiscreteFunction> make_data_sequence(const Mesh& mesh, const DiscreteFunction& f,
                                                 const ApproximationSchedule& schedule)
{
    schedule.validate();
    f.require_mesh(mesh, "make_data_sequence");
    std::vector<DiscreteFunction> out;
    for (double level : schedule.levels)
        out.push_back(schedule.mode == ScheduleMode::truncate_data ? truncate(f, level)
                                                                   : clip_and_rescale(mesh, f, level));
    return out;
}

double entropy_residual(const Mesh& mesh, const DiscreteFunction& u, const DiscreteFunction& f,
                        const DiscreteFunction& phi, double k, double p, ResidualMode mode)
{
    u.require_mesh(mesh, "entropy_residual");
    f.require_mesh(mesh, "entropy_residual");
    phi.require_mesh(mesh, "entropy_residual");
    if (!(k > 0.0))
        throw DomainError("truncation level must be positive");
    if (!(p > 1.0))
        throw DomainError("p must exceed 1");
    require_boundary_zero(mesh, phi);

    CompensatedSum lhs, rhs;
    if (mode == ResidualMode::consistent) {
        std::vector<double> psi(u.size());
        for (std::size_t i = 0; i < psi.size(); ++i)
            psi[i] = truncate_value(u[i] - phi[i], k);
        for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
            const Vec3 gu = cell_gradient(mesh, u.values(), c);
            const Vec3 gpsi = cell_gradient(mesh, psi, c);
            lhs.add(mesh.cell_volume(c) * dot(flux(gu, p), gpsi));
        }
        const auto b = consistent_load(mesh, f);
        for (std::size_t i = 0; i < psi.size(); ++i)
            rhs.add(b[i] * psi[i]);
        return lhs.value() - rhs.value();
    }

    const int dim = mesh.dimension();
    const QuadratureRule rule = three_point_rule(dim);
    const double levels[2] = {-k, k};
    std::array<double, 3> w{}, fw{};
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
        const auto nodes = mesh.cell(c);
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            const auto v = static_cast<std::size_t>(nodes[j]);
            w[j] = u[v] - phi[v];
            fw[j] = f[v];
        }
        const std::span<const double> wv(w.data(), nodes.size());
        const std::span<const double> fv(fw.data(), nodes.size());
        const double vol = mesh.cell_volume(c);

        const Vec3 gu = cell_gradient(mesh, u.values(), c);
        const Vec3 gphi = cell_gradient(mesh, phi.values(), c);
        const Vec3 dg{gu[0] - gphi[0], gu[1] - gphi[1], gu[2] - gphi[2]};
        lhs.add(vol * fraction_abs_below(wv, k) * dot(flux(gu, p), dg));

        double cell = 0.0;
        for (const CellPiece& piece : split_cell(dim, wv, levels)) {
            double acc = 0.0;
            for (std::size_t q = 0; q < rule.size(); ++q) {
                const auto x = map_to_piece(piece, dim, rule.points[q]);
                acc += rule.weights[q] * truncate_value(eval_linear(wv, x), k) * eval_linear(fv, x);
            }
            cell += piece.fraction * acc;
        }
        rhs.add(vol * cell);
    }
    return lhs.value() - rhs.value();
}

TestBank default_test_bank(const Mesh& mesh, const DiscreteFunction& u)
{
    u.require_mesh(mesh, "default_test_bank");
    const double amp = u.max_abs() > 0.0 ? 0.5 * u.max_abs() : 1.0;
    const std::size_t nv = mesh.num_vertices();

    auto interior_near = [&](std::size_t start) {
        for (std::size_t off = 0; off < nv; ++off) {
            const std::size_t i = (start + off) % nv;
            if (!mesh.is_boundary(static_cast<Index>(i)))
                return i;
        }
        return start;
    };
    auto hat = [&](std::size_t i, double value) {
        std::vector<double> v(nv, 0.0);
        v[i] = value;
        return DiscreteFunction(mesh, std::move(v));
    };

    TestBank bank;
    bank.names.push_back("zero");
    bank.functions.push_back(DiscreteFunction::zeros(mesh));
    bank.names.push_back("hat+");
    bank.functions.push_back(hat(interior_near(nv / 3), amp));
    bank.names.push_back("hat-");
    bank.functions.push_back(hat(interior_near(2 * nv / 3), -amp));

    const Point centre = mesh.vertex(static_cast<std::size_t>(center_vertex(mesh)));
    double radius = 0.0;
    for (const Point& x : mesh.vertices()) {
        double d = 0.0;
        for (int k = 0; k < 3; ++k)
            d += (x[k] - centre[k]) * (x[k] - centre[k]);
        radius = std::max(radius, std::sqrt(d));
    }
    radius *= 0.5;
    std::vector<double> bump(nv, 0.0);
    for (std::size_t i = 0; i < nv; ++i) {
        if (mesh.is_boundary(static_cast<Index>(i)))
            continue;
        const Point& x = mesh.vertex(i);
        double d = 0.0;
        for (int k = 0; k < 3; ++k)
            d += (x[k] - centre[k]) * (x[k] - centre[k]);
        const double s = std::max(0.0, 1.0 - d / (radius * radius));
        bump[i] = amp * s * s;
    }
    bank.names.push_back("bump");
    bank.functions.push_back(DiscreteFunction(mesh, std::move(bump)));

    bank.names.push_back("truncated_u");
    bank.functions.push_back(u.max_abs() > 0.0 ? truncate(u, 0.5 * u.max_abs()) : DiscreteFunction::zeros(mesh));
    return bank;
}

std::vector<double> default_certificate_levels(const DiscreteFunction& u)
{
    const double m = u.max_abs() > 0.0 ? u.max_abs() : 1.0;
    return log_spaced(0.05 * m, 2.0 * m, 5);
}

CertificateSummary entropy_certificate(const Mesh& mesh, const DiscreteFunction& u, const DiscreteFunction& f,
                                       std::span<const double> k_grid, const TestBank& bank, double p,
                                       ResidualMode mode)
{
    if (k_grid.empty() || bank.size() == 0)
        throw DomainError("entropy_certificate: empty level grid or test bank");
    const double f_l1 = abs_integral(mesh, f);
    CertificateSummary s;
    s.residuals.assign(bank.size(), std::vector<double>(k_grid.size(), 0.0));
    bool first = true;
    for (std::size_t j = 0; j < bank.size(); ++j) {
        const double phi_max = bank.functions[j].max_abs();
        for (std::size_t m = 0; m < k_grid.size(); ++m) {
            const double r = entropy_residual(mesh, u, f, bank.functions[j], k_grid[m], p, mode);
            s.residuals[j][m] = r;
            const double denom = (k_grid[m] + phi_max) * (f_l1 > 0.0 ? f_l1 : 1.0);
            s.max_scaled = std::max(s.max_scaled, std::abs(r) / denom);
            if (first || std::abs(r) > s.max_abs) {
                s.max_abs = std::abs(r);
                s.worst_test = j;
                s.worst_k = m;
                first = false;
            }
        }
    }
    return s;
}

double restricted_gradient_energy(const Mesh& mesh, const DiscreteFunction& u, double k, double p)
{
    u.require_mesh(mesh, "restricted_gradient_energy");
    CompensatedSum sum;
    std::array<double, 3> w{};
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
        const auto nodes = mesh.cell(c);
        for (std::size_t j = 0; j < nodes.size(); ++j)
            w[j] = u[static_cast<std::size_t>(nodes[j])];
        const double frac = fraction_abs_below(std::span<const double>(w.data(), nodes.size()), k);
        if (frac == 0.0)
            continue;
        sum.add(mesh.cell_volume(c) * frac * std::pow(norm(cell_gradient(mesh, u.values(), c)), p));
    }
    return sum.value();
}

AprioriCheck apriori_estimate_check(const Mesh& mesh, const DiscreteFunction& u, const DiscreteFunction& f,
                                    std::span<const double> k_grid, double p)
{
    const double f_l1 = abs_integral(mesh, f);
    if (!(f_l1 > 0.0))
        throw DegenerateInput("apriori_estimate_check: data vanishes identically");
    AprioriCheck check;
    check.k_grid.assign(k_grid.begin(), k_grid.end());
    for (double k : k_grid) {
        if (!(k > 0.0))
            throw DomainError("truncation level must be positive");
        const double nodal = std::pow(grad_lp_norm(mesh, gradient(mesh, truncate(u, k)), p), p) / (k * f_l1);
        check.ratios.push_back(nodal);
        check.max_ratio = std::max(check.max_ratio, nodal);
        const double restricted = restricted_gradient_energy(mesh, u, k, p) / (k * f_l1);
        check.restricted_ratios.push_back(restricted);
        check.max_restricted_ratio = std::max(check.max_restricted_ratio, restricted);
    }
    return check;
}

std::vector<double> default_apriori_levels(const DiscreteFunction& u)
{
    const double m = u.max_abs() > 0.0 ? u.max_abs() : 1.0;
    return log_spaced(1e-3 * m, m, 16);
}

std::optional<double> u_decay_reference(int N, double p)
{
    if (!(p > 1.0) || !(p < N))
        return std::nullopt;
    return N * (p - 1.0) / (N - p);
}

std::optional<double> grad_decay_reference(int N, double p)
{
    if (!(p > 1.0) || !(p < N))
        return std::nullopt;
    return N * (p - 1.0) / (N - 1.0);
}

namespace {

DecayCheck fit_decay(DistributionCurve curve, std::optional<double> reference, const DecayWindow& window)
{
    DecayCheck check;
    check.curve = std::move(curve);
    if (!reference) {
        check.note = "not applicable: p >= N";
        return check;
    }
    check.applicable = true;
    check.reference = *reference;
    const auto& t = check.curve.thresholds;
    if (t.empty()) {
        check.note = "no tail: function vanishes";
        return check;
    }
    const std::size_t n = t.size();
    const auto lo = static_cast<std::size_t>(window.drop_low * static_cast<double>(n));
    const auto drop = static_cast<std::size_t>(window.drop_high * static_cast<double>(n));
    const std::size_t hi = n > drop + 1 ? n - drop - 1 : 0;
    if (window.relative) {
        check.k_lo = window.relative->first * t.back();
        check.k_hi = window.relative->second * t.back();
    } else {
        check.k_lo = t[std::min(lo, n - 1)];
        check.k_hi = t[std::max(hi, std::min(lo, n - 1))];
    }

    std::size_t positive = 0;
    double first = -1.0;
    bool constant = true;
    for (std::size_t i = 0; i < n; ++i) {
        if (t[i] < check.k_lo || t[i] > check.k_hi || !(check.curve.measures[i] > 0.0))
            continue;
        if (positive == 0)
            first = check.curve.measures[i];
        else if (check.curve.measures[i] != first)
            constant = false;
        ++positive;
    }
    if (positive < 4) {
        check.note = "no tail: fewer than 4 positive samples in the window";
        return check;
    }
    if (constant) {
        check.note = "no tail: distribution is constant in the window";
        return check;
    }
    check.fit = tail_exponent_fit(check.curve, check.k_lo, check.k_hi);
    check.has_tail = true;
    check.fitted = -check.fit.slope;
    check.relative_error = std::abs(check.fitted - check.reference) / check.reference;
    return check;
}

} // namespace

DecayCheck u_decay_check(const Mesh& mesh, const DiscreteFunction& u, double p, const DecayWindow& window,
                         std::size_t n_thresholds)
{
    const auto thresholds = default_thresholds(u.values(), n_thresholds);
    DistributionCurve curve;
    if (!thresholds.empty())
        curve = distribution_function(mesh, u, thresholds);
    return fit_decay(std::move(curve), u_decay_reference(mesh.dimension(), p), window);
}

DecayCheck grad_decay_check(const Mesh& mesh, const DiscreteFunction& u, double p, const DecayWindow& window,
                            std::size_t n_thresholds)
{
    const auto mags = gradient(mesh, u).magnitudes();
    const auto thresholds = default_thresholds(mags, n_thresholds);
    DistributionCurve curve;
    if (!thresholds.empty())
        curve = cell_distribution_function(mesh, mags, thresholds);
    return fit_decay(std::move(curve), grad_decay_reference(mesh.dimension(), p), window);
}

CauchyTable cauchy_in_measure(const Mesh& mesh, std::span<const DiscreteFunction> solutions,
                              std::span<const double> t_grid)
{
    if (solutions.size() < 2)
        throw DomainError("cauchy_in_measure: need at least 2 solutions");
    std::vector<GradientField> grads;
    for (const DiscreteFunction& u : solutions)
        grads.push_back(gradient(mesh, u));
    CauchyTable table;
    table.pairs = all_pairs(solutions.size());
    table.t_grid.assign(t_grid.begin(), t_grid.end());
    std::vector<double> diff(mesh.num_cells());
    for (const LevelPair& pair : table.pairs) {
        for (std::size_t c = 0; c < diff.size(); ++c) {
            const Vec3& a = grads[pair.a][c];
            const Vec3& b = grads[pair.b][c];
            diff[c] = norm(Vec3{a[0] - b[0], a[1] - b[1], a[2] - b[2]});
        }
        table.measures.push_back(cell_distribution_function(mesh, diff, t_grid).measures);
    }
    return table;
}

TruncationTable truncation_convergence(const Mesh& mesh, std::span<const DiscreteFunction> solutions,
                                       std::span<const double> k_grid, double p)
{
    if (solutions.size() < 2)
        throw DomainError("truncation_convergence: need at least 2 solutions");
    TruncationTable table;
    table.pairs = all_pairs(solutions.size());
    table.k_grid.assign(k_grid.begin(), k_grid.end());
    for (const LevelPair& pair : table.pairs) {
        std::vector<double> row;
        for (double k : k_grid) {
            const DiscreteFunction d = truncate(solutions[pair.a], k) - truncate(solutions[pair.b], k);
            row.push_back(grad_lp_norm(mesh, gradient(mesh, d), p));
        }
        table.gaps.push_back(std::move(row));
    }
    return table;
}

bool EntropyReport::all_converged() const
{
    return std::all_of(stages.begin(), stages.end(), [](const StageRecord& s) { return s.outcome.converged; });
}

double EntropyReport::max_apriori_ratio() const
{
    double m = 0.0;
    for (const StageRecord& s : stages)
        if (s.outcome.converged)
            m = std::max(m, s.apriori.max_ratio);
    return m;
}

EntropyReport run_approximation(const Mesh& mesh, const DiscreteFunction& f, const ApproximationSchedule& schedule,
                                const SolverConfig& config, const ApproximationOptions& options)
{
    config.validate_for(mesh);
    const auto data = make_data_sequence(mesh, f, schedule);
    auto outcomes = solve_stages(mesh, data, config, options.warm_start);

    EntropyReport report;
    report.p = config.p;
    report.dimension = mesh.dimension();
    const DiscreteFunction& candidate = outcomes.back().solution;
    const auto k_grid = options.k_grid.empty() ? default_apriori_levels(candidate) : options.k_grid;
    const TestBank bank = default_test_bank(mesh, candidate);
    report.test_names = bank.names;
    report.certificate_levels = default_certificate_levels(candidate);

    for (std::size_t s = 0; s < outcomes.size(); ++s) {
        StageRecord record;
        record.level = schedule.levels[s];
        record.data_error = abs_integral(mesh, data[s] - f);
        if (abs_integral(mesh, data[s]) > 0.0)
            record.apriori = apriori_estimate_check(mesh, outcomes[s].solution, data[s], k_grid, config.p);
        record.certificate = entropy_certificate(mesh, outcomes[s].solution, f, report.certificate_levels, bank,
                                                 config.p, options.residual_mode);
        record.outcome = std::move(outcomes[s]);
        report.stages.push_back(std::move(record));
    }

    report.u_decay = u_decay_check(mesh, report.candidate(), config.p, options.u_window, options.decay_thresholds);
    report.grad_decay =
        grad_decay_check(mesh, report.candidate(), config.p, options.grad_window, options.decay_thresholds);

    std::vector<DiscreteFunction> solutions;
    for (const StageRecord& s : report.stages)
        solutions.push_back(s.outcome.solution);
    report.truncation = truncation_convergence(mesh, solutions, report.certificate_levels, config.p);
    std::vector<double> t_grid = options.t_grid;
    if (t_grid.empty()) {
        const double g = max_gradient(mesh, report.candidate());
        t_grid = log_spaced(1e-3 * (g > 0.0 ? g : 1.0), g > 0.0 ? g : 1.0, 8);
    }
    report.cauchy = cauchy_in_measure(mesh, solutions, t_grid);
    return report;
}

UniquenessGap uniqueness_crosscheck(const Mesh& mesh, const DiscreteFunction& f,
                                    const ApproximationSchedule& schedule_a,
                                    const ApproximationSchedule& schedule_b, const SolverConfig& config,
                                    std::span<const double> k_grid)
{
    config.validate_for(mesh);
    const auto data_a = make_data_sequence(mesh, f, schedule_a);
    const auto data_b = make_data_sequence(mesh, f, schedule_b);
    const auto runs_a = solve_stages(mesh, data_a, config, true);
    const auto runs_b = solve_stages(mesh, data_b, config, false);
    const DiscreteFunction& ua = runs_a.back().solution;
    const DiscreteFunction& ub = runs_b.back().solution;

    UniquenessGap gap;
    gap.converged = std::all_of(runs_a.begin(), runs_a.end(), [](const auto& o) { return o.converged; }) &&
                    std::all_of(runs_b.begin(), runs_b.end(), [](const auto& o) { return o.converged; });
    gap.l1_gap = abs_integral(mesh, ua - ub);
    gap.l1_reference = abs_integral(mesh, ua);
    const auto levels = k_grid.empty() ? default_apriori_levels(ua) : std::vector<double>(k_grid.begin(), k_grid.end());
    for (double k : levels) {
        const DiscreteFunction d = truncate(ua, k) - truncate(ub, k);
        gap.linf_truncation_gap = std::max(gap.linf_truncation_gap, d.max_abs());
    }
    return gap;
}

} // namespace plap
