#pragma once

#include "plap/fields.hpp"
#include "plap/solver.hpp"

#include <optional>
#include <string>
#include <vector>

namespace plap {

enum class PiconeMode {
    /// grad(u^p / v^(p-1)) expanded by the chain rule with cell-mean u, v.
    chain_rule,
    /// u^p / v^(p-1) interpolated nodally, then differentiated.
    interpolated,
};

/// Per-cell values of
///   L = |grad u|^p + (p-1) (u/v)^p |grad v|^p - p (u/v)^(p-1) |grad v|^(p-2) grad v . grad u
///   R = |grad u|^p - |grad v|^(p-2) grad v . grad(u^p / v^(p-1))
/// with u, v replaced by their cell means. Cells where some node has
/// v <= floor are marked invalid and carry L = R = 0.
struct PiconeField {
    MeshId mesh;
    std::vector<double> l_values;
    std::vector<double> r_values;
    std::vector<unsigned char> valid;

    std::size_t valid_count() const;
    double min_l() const;          ///< over valid cells
    double max_abs_l() const;      ///< over valid cells
    double max_identity_gap() const; ///< max |L - R| over valid cells
    /// Sum over valid cells of |L - R| times the cell volume.
    double identity_gap_l1(const Mesh& mesh) const;
};

/// Positivity floor used when none is given: 1e-8 max(v).
double default_positivity_floor(const DiscreteFunction& v);

/// Requires u >= 0 nodally.
PiconeField picone_pointwise(const Mesh& mesh, const DiscreteFunction& u, const DiscreteFunction& v, double p,
                             PiconeMode mode, std::optional<double> floor = std::nullopt);

struct PiconeIntegral {
    double lhs = 0.0; ///< integral |grad u|^p
    double rhs = 0.0; ///< integral |grad v|^(p-2) grad v . grad w, w = I_h(u^p / v^(p-1))

    double slack() const noexcept { return lhs - rhs; }
};

/// u >= 0 must vanish on boundary nodes. w is set to 0 where u = 0; elsewhere
/// v must exceed the floor (DomainError otherwise).
PiconeIntegral picone_integral(const Mesh& mesh, const DiscreteFunction& u, const DiscreteFunction& v, double p,
                               std::optional<double> floor = std::nullopt);

/// Ordering report for -Delta_p u = lambda h u^q with 0 < q < p - 1.
///
/// The supersolution is the solution u itself, the subsolution is mu u
/// (0 < mu <= 1). Besides the nodal ordering, the report checks the discrete
/// residual signs of both and reruns the fixed point from the subsolution.
struct ComparisonReport {
    std::size_t violations = 0;     ///< nodes with super < sub - 10 grad_tol
    double worst_gap = 0.0;         ///< min over nodes of super - sub
    std::size_t sub_residual_violations = 0;   ///< nodes where sub is not a subsolution
    std::size_t super_residual_violations = 0; ///< nodes where super is not a supersolution
    double from_sub_gap = 0.0;      ///< ||u(start = sub) - u||_inf
    int iterations = 0;             ///< fixed-point iterations of the main solve
    int iterations_from_sub = 0;
    bool converged = false;
    DiscreteFunction supersolution;
    DiscreteFunction subsolution;
};

ComparisonReport comparison_check(const Mesh& mesh, const DiscreteFunction& h, double lambda, double q, double mu,
                                  const SolverConfig& config);

/// `cell_index,L,R,valid` CSV.
std::string format_picone_csv(const PiconeField& field);

} // namespace plap
