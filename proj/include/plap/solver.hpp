#pragma once

#include "plap/fields.hpp"
#include "plap/mesh.hpp"

#include <optional>
#include <vector>

namespace plap {

enum class BoundaryMode { dirichlet_zero, zero_mean };

struct LineSearch {
    double shrink = 0.5;    ///< step reduction factor, in (0, 1)
    double decrease = 1e-4; ///< Armijo constant, in (0, 0.5)
};

/// Settings for the p-Laplacian solver.
///
/// grad_tol is relative: a solve has converged when the l1 norm of the nodal
/// residual is at most grad_tol times the l1 norm of the load vector.
/// max_iter caps the Newton iterations of each continuation stage.
struct SolverConfig {
    double p = 2.0;
    double epsilon = 0.0;
    double grad_tol = 1e-8;
    int max_iter = 200;
    BoundaryMode bc_mode = BoundaryMode::dirichlet_zero;
    LineSearch line_search;
    double epsilon0 = 1e-2;           ///< first continuation level when p < 2
    double compatibility_tol = 1e-10; ///< zero_mean: |integral f| <= tol * ||f||_1

    /// Throws DomainError on out-of-range fields.
    void validate() const;
    /// validate() plus the bc_mode / mesh-kind pairing.
    void validate_for(const Mesh& mesh) const;
};

struct SolveOutcome {
    DiscreteFunction solution;
    int iterations = 0;
    double final_residual = 0.0;
    std::vector<double> energy_trace;
    bool converged = false;
};

/// Consistent P1 load vector b_i = integral f_h phi_i. In zero_mean mode the
/// vector is made exactly compatible (sum zero) after the tolerance check.
std::vector<double> load_vector(const Mesh& mesh, const DiscreteFunction& f, const SolverConfig& config);

/// J(u) = (1/p) integral (|grad u|^2 + eps^2)^(p/2) - integral f u.
double energy(const Mesh& mesh, const DiscreteFunction& u, const DiscreteFunction& f, const SolverConfig& config);

/// Nodal derivative of J; zero on Dirichlet nodes.
DiscreteFunction energy_gradient(const Mesh& mesh, const DiscreteFunction& u, const DiscreteFunction& f,
                                 const SolverConfig& config);

/// Minimizes J with damped Newton steps. For p < 2 and epsilon < epsilon0 the
/// regularization is driven down geometrically from epsilon0 to epsilon.
/// Returns converged = false instead of throwing when the iteration stalls.
SolveOutcome solve_weak(const Mesh& mesh, const DiscreteFunction& f, const SolverConfig& config,
                        const std::optional<DiscreteFunction>& initial = std::nullopt);

/// Fixed point u <- solve_weak(lambda h max(u, floor)^q) for 0 < q < p - 1.
/// Stops when ||u_new - u||_inf <= grad_tol * max(1, ||u||_inf). The default
/// start is solve_weak(lambda h). energy_trace is left empty.
SolveOutcome solve_semilinear(const Mesh& mesh, const DiscreteFunction& h, double lambda, double q,
                              const SolverConfig& config,
                              const std::optional<DiscreteFunction>& initial = std::nullopt);

/// <|xi|^(p-2) xi - |eta|^(p-2) eta, xi - eta>.
double monotonicity_pairing(const Vec3& xi, const Vec3& eta, double p);

/// Constants of the two-sided vector inequalities. sub2_upper bounds the
/// p <= 2 Taylor remainder from above, sub2_lower and super2_lower are the
/// coercivity constants for p <= 2 and p > 2.
struct InequalityConstants {
    double sub2_upper = 1.0;
    double sub2_lower = 0.0;
    double super2_lower = 0.0;
};

/// Slack (right side minus left side) of the four vector inequalities, with
/// r(a, b) = |a + b|^p - |a|^p - p |a|^(p-2) <a, b>:
///   sub2_upper:   C |b|^p - r(xi1, xi2)
///   sub2_lower:   r(xi1, xi2 - xi1) - C |xi2 - xi1|^2 / (|xi1| + |xi2|)^(2-p)
///   super2_upper: p(p-1)/2 (|xi1| + |xi2|)^(p-2) |xi2|^2 - r(xi1, xi2)
///   super2_lower: r(xi1, xi2 - xi1) - C / (2^p - 1) |xi2 - xi1|^p
/// All four are evaluated; only the pair matching `sub2_branch` is claimed.
struct InequalitySlacks {
    double sub2_upper = 0.0;
    double sub2_lower = 0.0;
    double super2_upper = 0.0;
    double super2_lower = 0.0;
    bool sub2_branch = true; ///< p <= 2

    /// Minimum slack over the active branch.
    double active_min() const noexcept;
};

InequalitySlacks algebraic_inequalities(const Vec3& xi1, const Vec3& xi2, double p,
                                        const InequalityConstants& constants);

/// Ratios that calibrate InequalityConstants: each constant is admissible
/// when it is above (upper) or below (lower) the ratio for every pair.
/// Ratios with a vanishing denominator are reported as NaN.
struct InequalityRatios {
    double upper = 0.0;        ///< r(xi1, xi2) / |xi2|^p
    double sub2_lower = 0.0;   ///< r(xi1, xi2 - xi1) (|xi1| + |xi2|)^(2-p) / |xi2 - xi1|^2
    double super2_lower = 0.0; ///< (2^p - 1) r(xi1, xi2 - xi1) / |xi2 - xi1|^p
};

InequalityRatios inequality_ratios(const Vec3& xi1, const Vec3& xi2, double p);

/// Bregman remainder r(a, b) = |a + b|^p - |a|^p - p |a|^(p-2) <a, b>,
/// evaluated without the cancellation of the naive formula.
double bregman_remainder(const Vec3& a, const Vec3& b, double p);

} // namespace plap
