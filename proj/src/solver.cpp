#include "plap/solver.hpp"

#include "plap/error.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <limits>

namespace plap {

void SolverConfig::validate() const
{
    if (!(p > 1.0) || !std::isfinite(p))
        throw DomainError("p must exceed 1");
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon))
        throw DomainError("epsilon must be nonnegative");
    if (!(grad_tol > 0.0))
        throw DomainError("grad_tol must be positive");
    if (max_iter < 1)
        throw DomainError("max_iter must be at least 1");
    if (!(line_search.shrink > 0.0 && line_search.shrink < 1.0))
        throw DomainError("line_search.shrink must lie in (0, 1)");
    if (!(line_search.decrease > 0.0 && line_search.decrease < 0.5))
        throw DomainError("line_search.decrease must lie in (0, 0.5)");
    if (!(epsilon0 > 0.0))
        throw DomainError("epsilon0 must be positive");
    if (!(compatibility_tol >= 0.0))
        throw DomainError("compatibility_tol must be nonnegative");
}

void SolverConfig::validate_for(const Mesh& mesh) const
{
    validate();
    if (bc_mode == BoundaryMode::zero_mean && !mesh.closed())
        throw DomainError("zero_mean requires a closed mesh");
    if (bc_mode == BoundaryMode::dirichlet_zero && mesh.closed())
        throw DomainError("dirichlet_zero requires a mesh with boundary");
}

namespace {

// (s_old + ds)^(p/2) - s_old^(p/2) without cancellation.
double power_increment(double s_old, double ds, double p)
{
    if (!(s_old > 0.0))
        return std::pow(std::max(s_old + ds, 0.0), 0.5 * p);
    const double x = std::max(ds / s_old, -1.0);
    return std::pow(s_old, 0.5 * p) * std::expm1(0.5 * p * std::log1p(x));
}

// |g|^(p-2) g with the convention 0 at g = 0, regularized by eps.
double flux_coefficient(double s, double p)
{
    return s > 0.0 ? std::pow(s, 0.5 * (p - 2.0)) : 0.0;
}

class Problem {
public:
    Problem(const Mesh& mesh, const DiscreteFunction& f, const SolverConfig& config)
        : mesh_(mesh), config_(config), b_(load_vector(mesh, f, config)), dof_(mesh.num_vertices(), -1)
    {
        const bool ground = config.bc_mode == BoundaryMode::zero_mean;
        for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
            if (mesh.is_boundary(static_cast<Index>(i)) || (ground && i == 0))
                continue;
            dof_[i] = n_dofs_++;
        }
        for (std::size_t i = 0; i < b_.size(); ++i)
            if (!mesh.is_boundary(static_cast<Index>(i)))
                b_norm_ += std::abs(b_[i]);
    }

    const std::vector<double>& load() const { return b_; }
    double load_norm() const { return b_norm_; }
    int dofs() const { return n_dofs_; }

    Vec3 grad(const std::vector<double>& u, std::size_t c) const { return cell_gradient(mesh_, u, c); }

    double energy(const std::vector<double>& u, double eps) const
    {
        const double p = config_.p;
        CompensatedSum sum;
        for (std::size_t c = 0; c < mesh_.num_cells(); ++c) {
            const Vec3 g = grad(u, c);
            sum.add(mesh_.cell_volume(c) * std::pow(dot(g, g) + eps * eps, 0.5 * p) / p);
        }
        for (std::size_t i = 0; i < u.size(); ++i)
            sum.add(-b_[i] * u[i]);
        return sum.value();
    }

    // J(u + t d) - J(u).
    double energy_step(const std::vector<double>& u, const std::vector<double>& d, double t, double eps) const
    {
        const double p = config_.p;
        CompensatedSum sum;
        for (std::size_t c = 0; c < mesh_.num_cells(); ++c) {
            const Vec3 g = grad(u, c);
            const Vec3 dg = grad(d, c);
            const double s = dot(g, g) + eps * eps;
            const double ds = 2.0 * t * dot(g, dg) + t * t * dot(dg, dg);
            sum.add(mesh_.cell_volume(c) * power_increment(s, ds, p) / p);
        }
        for (std::size_t i = 0; i < u.size(); ++i)
            sum.add(-t * b_[i] * d[i]);
        return sum.value();
    }

    // J_{eps_new}(u) - J_{eps_old}(u).
    double energy_regularization_change(const std::vector<double>& u, double eps_old, double eps_new) const
    {
        const double p = config_.p;
        CompensatedSum sum;
        for (std::size_t c = 0; c < mesh_.num_cells(); ++c) {
            const Vec3 g = grad(u, c);
            const double s = dot(g, g) + eps_old * eps_old;
            sum.add(mesh_.cell_volume(c) * power_increment(s, eps_new * eps_new - eps_old * eps_old, p) / p);
        }
        return sum.value();
    }

    std::vector<double> residual(const std::vector<double>& u, double eps) const
    {
        std::vector<double> r(u.size(), 0.0);
        for (std::size_t c = 0; c < mesh_.num_cells(); ++c) {
            const Vec3 g = grad(u, c);
            const double a = mesh_.cell_volume(c) * flux_coefficient(dot(g, g) + eps * eps, config_.p);
            if (a == 0.0)
                continue;
            const auto nodes = mesh_.cell(c);
            const auto grads = mesh_.basis_gradients(c);
            for (std::size_t j = 0; j < nodes.size(); ++j)
                r[static_cast<std::size_t>(nodes[j])] += a * dot(g, grads[j]);
        }
        for (std::size_t i = 0; i < r.size(); ++i) {
            r[i] -= b_[i];
            if (mesh_.is_boundary(static_cast<Index>(i)))
                r[i] = 0.0;
        }
        return r;
    }

    double relative_l1(const std::vector<double>& r) const
    {
        double s = 0.0;
        for (double x : r)
            s += std::abs(x);
        return s / b_norm_;
    }

    // Hessian of J_eps restricted to the free dofs. `linear` gives the p = 2
    // stiffness matrix regardless of u.
    Eigen::SparseMatrix<double> hessian(const std::vector<double>& u, double eps, bool linear) const
    {
        const double p = config_.p;
        double gmax = 0.0;
        if (!linear)
            for (std::size_t c = 0; c < mesh_.num_cells(); ++c)
                gmax = std::max(gmax, norm(grad(u, c)));
        const double floor_sq = (1e-6 * gmax) * (1e-6 * gmax);

        std::vector<Eigen::Triplet<double>> triplets;
        triplets.reserve(mesh_.num_cells() * 9);
        for (std::size_t c = 0; c < mesh_.num_cells(); ++c) {
            const auto nodes = mesh_.cell(c);
            const auto grads = mesh_.basis_gradients(c);
            const double vol = mesh_.cell_volume(c);
            Vec3 g{0.0, 0.0, 0.0};
            double a = 1.0, bb = 0.0;
            if (!linear) {
                g = grad(u, c);
                // The floor only guards against a vanishing curvature (p > 2) or
                // an exactly zero gradient; for p < 2 it would weaken the
                // curvature of nearly flat cells and cause overshoot.
                double s = dot(g, g) + eps * eps;
                if (p > 2.0 || !(s > 0.0))
                    s = std::max(s, floor_sq);
                a = std::pow(s, 0.5 * (p - 2.0));
                bb = (p - 2.0) * std::pow(s, 0.5 * (p - 4.0));
            }
            for (std::size_t i = 0; i < nodes.size(); ++i) {
                const int di = dof_[static_cast<std::size_t>(nodes[i])];
                if (di < 0)
                    continue;
                for (std::size_t j = 0; j < nodes.size(); ++j) {
                    const int dj = dof_[static_cast<std::size_t>(nodes[j])];
                    if (dj < 0)
                        continue;
                    const double v =
                        vol * (a * dot(grads[i], grads[j]) + bb * dot(g, grads[i]) * dot(g, grads[j]));
                    triplets.emplace_back(di, dj, v);
                }
            }
        }
        Eigen::SparseMatrix<double> H(n_dofs_, n_dofs_);
        H.setFromTriplets(triplets.begin(), triplets.end());
        return H;
    }

    Eigen::VectorXd restrict_to_dofs(const std::vector<double>& v) const
    {
        Eigen::VectorXd out(n_dofs_);
        for (std::size_t i = 0; i < v.size(); ++i)
            if (dof_[i] >= 0)
                out[dof_[i]] = v[i];
        return out;
    }

    std::vector<double> extend(const Eigen::VectorXd& x) const
    {
        std::vector<double> out(dof_.size(), 0.0);
        for (std::size_t i = 0; i < dof_.size(); ++i)
            if (dof_[i] >= 0)
                out[i] = x[dof_[i]];
        return out;
    }

    bool gradient_vanishes(const std::vector<double>& u) const
    {
        for (std::size_t c = 0; c < mesh_.num_cells(); ++c) {
            const Vec3 g = grad(u, c);
            if (dot(g, g) > 0.0)
                return false;
        }
        return true;
    }

    // Linear (p = 2) solve scaled to minimize J along its ray.
    std::vector<double> initial_guess() const
    {
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(hessian({}, 0.0, true));
        if (ldlt.info() != Eigen::Success)
            return std::vector<double>(dof_.size(), 0.0);
        std::vector<double> u = extend(ldlt.solve(restrict_to_dofs(b_)));
        double B = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i)
            B += b_[i] * u[i];
        CompensatedSum A;
        for (std::size_t c = 0; c < mesh_.num_cells(); ++c)
            A.add(mesh_.cell_volume(c) * std::pow(norm(grad(u, c)), config_.p));
        if (!(B > 0.0) || !(A.value() > 0.0))
            return std::vector<double>(dof_.size(), 0.0);
        const double t = std::pow(B / A.value(), 1.0 / (config_.p - 1.0));
        for (double& x : u)
            x *= t;
        return u;
    }

private:
    const Mesh& mesh_;
    const SolverConfig& config_;
    std::vector<double> b_;
    std::vector<int> dof_;
    int n_dofs_ = 0;
    double b_norm_ = 0.0;
};

double dot_vec(const std::vector<double>& a, const std::vector<double>& b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

double max_abs(const std::vector<double>& v)
{
    double m = 0.0;
    for (double x : v)
        m = std::max(m, std::abs(x));
    return m;
}

struct StageResult {
    bool converged = false;
    double residual = 0.0;
};

constexpr int kStallLimit = 10;

class NewtonDriver {
public:
    NewtonDriver(const Problem& problem, const SolverConfig& config, std::vector<double>& u,
                 SolveOutcome& outcome)
        : problem_(problem), config_(config), u_(u), outcome_(outcome)
    {
    }

    StageResult run(double eps, double tol)
    {
        std::vector<double> prev_u, prev_r;
        bool have_prev = false;
        double best = INFINITY;
        int stalled = 0;
        for (int it = 0;; ++it) {
            std::vector<double> r = problem_.residual(u_, eps);
            const double rel = problem_.relative_l1(r);
            if (rel <= tol)
                return {true, rel};
            // residual at its rounding floor
            stalled = rel < best ? 0 : stalled + 1;
            best = std::min(best, rel);
            if (it >= config_.max_iter || stalled >= kStallLimit)
                return {false, rel};

            std::vector<double> d;
            bool newton = false;
            if (!problem_.gradient_vanishes(u_) || eps > 0.0) {
                if (pattern_ready_)
                    ldlt_.factorize(problem_.hessian(u_, eps, false));
                else {
                    ldlt_.compute(problem_.hessian(u_, eps, false));
                    pattern_ready_ = true;
                }
                if (ldlt_.info() == Eigen::Success) {
                    d = problem_.extend(-ldlt_.solve(problem_.restrict_to_dofs(r)));
                    newton = std::all_of(d.begin(), d.end(), [](double x) { return std::isfinite(x); }) &&
                             dot_vec(r, d) < 0.0;
                }
            }
            if (!newton) {
                double alpha = 0.0;
                if (have_prev) {
                    double ss = 0.0, sy = 0.0;
                    for (std::size_t i = 0; i < u_.size(); ++i) {
                        const double s = u_[i] - prev_u[i], y = r[i] - prev_r[i];
                        ss += s * s;
                        sy += s * y;
                    }
                    if (sy > 0.0)
                        alpha = ss / sy;
                }
                if (!(alpha > 0.0) || !std::isfinite(alpha))
                    alpha = 1e-2 * std::max(max_abs(u_), 1e-3) / max_abs(r);
                d.assign(r.size(), 0.0);
                for (std::size_t i = 0; i < r.size(); ++i)
                    d[i] = -alpha * r[i];
            }

            const double slope = dot_vec(r, d);
            double t = 1.0, dj = 0.0;
            bool accepted = false;
            for (int k = 0; k < 60; ++k) {
                dj = problem_.energy_step(u_, d, t, eps);
                if (dj <= config_.line_search.decrease * t * slope) {
                    accepted = true;
                    break;
                }
                t *= config_.line_search.shrink;
            }
            if (!accepted)
                return {false, rel};

            prev_u = u_;
            prev_r = std::move(r);
            have_prev = true;
            for (std::size_t i = 0; i < u_.size(); ++i)
                u_[i] += t * d[i];
            energy_ += dj;
            outcome_.energy_trace.push_back(energy_);
            ++outcome_.iterations;
        }
    }

    void start(double eps)
    {
        energy_ = problem_.energy(u_, eps);
        outcome_.energy_trace.push_back(energy_);
    }

    void change_regularization(double eps_old, double eps_new)
    {
        energy_ += problem_.energy_regularization_change(u_, eps_old, eps_new);
        outcome_.energy_trace.push_back(energy_);
    }

private:
    const Problem& problem_;
    const SolverConfig& config_;
    std::vector<double>& u_;
    SolveOutcome& outcome_;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt_;
    bool pattern_ready_ = false;
    double energy_ = 0.0;
};

} // namespace

std::vector<double> load_vector(const Mesh& mesh, const DiscreteFunction& f, const SolverConfig& config)
{
    f.require_mesh(mesh, "load_vector");
    const int n = mesh.nodes_per_cell();
    std::vector<double> b(mesh.num_vertices(), 0.0);
    for (std::size_t c = 0; c < mesh.num_cells(); ++c) {
        const auto nodes = mesh.cell(c);
        double sum = 0.0;
        for (Index v : nodes)
            sum += f[static_cast<std::size_t>(v)];
        const double w = mesh.cell_volume(c) / static_cast<double>(n * (n + 1));
        for (Index v : nodes)
            b[static_cast<std::size_t>(v)] += w * (sum + f[static_cast<std::size_t>(v)]);
    }
    if (config.bc_mode == BoundaryMode::zero_mean) {
        CompensatedSum total;
        for (double x : b)
            total.add(x);
        const double l1 = abs_integral(mesh, f);
        if (std::abs(total.value()) > config.compatibility_tol * l1)
            throw DomainError("incompatible data: integral of f is " + std::to_string(total.value()) +
                              ", must vanish for zero_mean");
        const auto mass = mesh.lumped_mass();
        const double shift = total.value() / mesh.total_volume();
        for (std::size_t i = 0; i < b.size(); ++i)
            b[i] -= mass[i] * shift;
    }
    return b;
}

double energy(const Mesh& mesh, const DiscreteFunction& u, const DiscreteFunction& f, const SolverConfig& config)
{
    config.validate();
    u.require_mesh(mesh, "energy");
    const Problem problem(mesh, f, config);
    return problem.energy(std::vector<double>(u.values().begin(), u.values().end()), config.epsilon);
}

DiscreteFunction energy_gradient(const Mesh& mesh, const DiscreteFunction& u, const DiscreteFunction& f,
                                 const SolverConfig& config)
{
    config.validate();
    u.require_mesh(mesh, "energy_gradient");
    const Problem problem(mesh, f, config);
    return u.with_values(problem.residual(std::vector<double>(u.values().begin(), u.values().end()),
                                          config.epsilon));
}

SolveOutcome solve_weak(const Mesh& mesh, const DiscreteFunction& f, const SolverConfig& config,
                        const std::optional<DiscreteFunction>& initial)
{
    config.validate_for(mesh);
    f.require_mesh(mesh, "solve_weak");
    const Problem problem(mesh, f, config);

    SolveOutcome outcome;
    if (problem.load_norm() == 0.0) {
        outcome.solution = DiscreteFunction::zeros(mesh);
        outcome.energy_trace.push_back(0.0);
        outcome.converged = true;
        return outcome;
    }

    std::vector<double> u;
    if (initial) {
        initial->require_mesh(mesh, "solve_weak initial iterate");
        u.assign(initial->values().begin(), initial->values().end());
        for (Index v : mesh.boundary_nodes())
            u[static_cast<std::size_t>(v)] = 0.0;
    } else {
        u = problem.initial_guess();
    }

    // Continuation levels are relative to the gradient scale of the start.
    std::vector<double> levels;
    double gscale = 0.0;
    for (std::size_t c = 0; c < mesh.num_cells(); ++c)
        gscale = std::max(gscale, norm(problem.grad(u, c)));
    if (!(gscale > 0.0))
        gscale = 1.0;
    if (config.p < 2.0 && config.epsilon < config.epsilon0 * gscale)
        for (double eps = config.epsilon0 * gscale; eps > std::max(config.epsilon, 1e-7 * gscale); eps /= 10.0)
            levels.push_back(eps);
    levels.push_back(config.epsilon);

    NewtonDriver driver(problem, config, u, outcome);
    driver.start(levels.front());
    StageResult result;
    const double coarse_tol = std::max(config.grad_tol, 1e-6);
    for (std::size_t s = 0; s < levels.size(); ++s) {
        if (s > 0)
            driver.change_regularization(levels[s - 1], levels[s]);
        const bool last = s + 1 == levels.size();
        result = driver.run(levels[s], last ? config.grad_tol : coarse_tol);
    }

    if (config.bc_mode == BoundaryMode::zero_mean) {
        const auto mass = mesh.lumped_mass();
        CompensatedSum sum;
        for (std::size_t i = 0; i < u.size(); ++i)
            sum.add(mass[i] * u[i]);
        const double mean = sum.value() / mesh.total_volume();
        for (double& x : u)
            x -= mean;
    }
    outcome.solution = DiscreteFunction(mesh, std::move(u));
    outcome.final_residual = result.residual;
    outcome.converged = result.converged;
    return outcome;
}

SolveOutcome solve_semilinear(const Mesh& mesh, const DiscreteFunction& h, double lambda, double q,
                              const SolverConfig& config, const std::optional<DiscreteFunction>& initial)
{
    config.validate_for(mesh);
    h.require_mesh(mesh, "solve_semilinear");
    if (config.bc_mode != BoundaryMode::dirichlet_zero)
        throw DomainError("solve_semilinear requires dirichlet_zero");
    if (!(q > 0.0 && q < config.p - 1.0))
        throw DomainError("q must lie in (0, p - 1)");
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw DomainError("lambda must be positive");
    for (double x : h.values())
        if (x < 0.0)
            throw DomainError("h must be nonnegative");

    SolveOutcome outcome;
    if (h.max_abs() == 0.0) {
        outcome.solution = DiscreteFunction::zeros(mesh);
        outcome.converged = true;
        return outcome;
    }

    SolverConfig inner = config;
    inner.grad_tol = std::max(config.grad_tol * 1e-2, 1e-12);

    const double scale = std::pow(lambda * h.max_abs(), 1.0 / (config.p - 1.0 - q));
    const double floor = 1e-12 * scale;

    DiscreteFunction lambda_h = lambda * h;
    DiscreteFunction u;
    if (initial) {
        initial->require_mesh(mesh, "solve_semilinear initial iterate");
        u = *initial;
    } else {
        SolveOutcome first = solve_weak(mesh, lambda_h, inner);
        if (!first.converged) {
            outcome.solution = first.solution;
            outcome.final_residual = first.final_residual;
            return outcome;
        }
        u = first.solution;
    }

    std::vector<double> rhs(h.size());
    for (int it = 1; it <= config.max_iter; ++it) {
        for (std::size_t i = 0; i < rhs.size(); ++i)
            rhs[i] = lambda_h[i] * std::pow(std::max(u[i], floor), q);
        SolveOutcome step = solve_weak(mesh, u.with_values(rhs), inner, u);
        outcome.iterations = it;
        double delta = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i)
            delta = std::max(delta, std::abs(step.solution[i] - u[i]));
        u = step.solution;
        const double size = u.max_abs();
        outcome.final_residual = size > 0.0 ? delta / size : delta;
        if (!step.converged)
            break;
        if (outcome.final_residual <= config.grad_tol) {
            outcome.converged = true;
            break;
        }
    }
    std::vector<double> clipped(u.values().begin(), u.values().end());
    for (double& x : clipped)
        x = std::max(x, 0.0);
    outcome.solution = u.with_values(std::move(clipped));
    return outcome;
}

} // namespace plap
