#pragma once

#include "plap/fields.hpp"
#include "plap/solver.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace plap {

enum class ScheduleMode { truncate_data, clip_and_rescale };

/// Data truncation heights n_1 < n_2 < ... used to build bounded
/// approximations f_n of the data.
struct ApproximationSchedule {
    std::vector<double> levels;
    ScheduleMode mode = ScheduleMode::truncate_data;

    /// Throws DomainError unless there are at least two strictly increasing,
    /// positive, finite levels.
    void validate() const;
};

/// f_n per level: T_n(f) nodally, or for clip_and_rescale the clipped data
/// with its positive or negative part scaled down so that the integral of f
/// is preserved.
std::vector<DiscreteFunction> make_data_sequence(const Mesh& mesh, const DiscreteFunction& f,
                                                 const ApproximationSchedule& schedule);

enum class ResidualMode {
    /// Test function I_h T_k(u - phi); LHS and RHS are the discrete weak form,
    /// so the residual of a converged solve is at solver precision.
    consistent,
    /// Restriction set {|u - phi| < k} and T_k(u - phi) taken on the linear
    /// interpolant with exact cell splitting; converges under refinement.
    exact_geometry,
};

/// LHS - RHS of the truncated test identity
///   integral_{|u - phi| < k} |grad u|^(p-2) grad u . grad(u - phi) = integral T_k(u - phi) f.
double entropy_residual(const Mesh& mesh, const DiscreteFunction& u, const DiscreteFunction& f,
                        const DiscreteFunction& phi, double k, double p,
                        ResidualMode mode = ResidualMode::consistent);

struct TestBank {
    std::vector<std::string> names;
    std::vector<DiscreteFunction> functions;

    std::size_t size() const noexcept { return functions.size(); }
};

/// Five bounded test functions vanishing on the boundary: 0, a positive and a
/// negative hat at two interior vertices, a smooth bump at the centre of the
/// bounding box and T_m(u) with m = max|u| / 2. Amplitudes scale with max|u|.
TestBank default_test_bank(const Mesh& mesh, const DiscreteFunction& u);

/// Five log-spaced levels from 0.05 max|u| to 2 max|u|.
std::vector<double> default_certificate_levels(const DiscreteFunction& u);

struct CertificateSummary {
    std::vector<std::vector<double>> residuals; ///< [test][k]
    double max_abs = 0.0;
    /// max of |residual| / ((k + ||phi||_inf) ||f||_1)
    double max_scaled = 0.0;
    std::size_t worst_test = 0;
    std::size_t worst_k = 0;
};

CertificateSummary entropy_certificate(const Mesh& mesh, const DiscreteFunction& u, const DiscreteFunction& f,
                                       std::span<const double> k_grid, const TestBank& bank, double p,
                                       ResidualMode mode = ResidualMode::consistent);

struct AprioriCheck {
    std::vector<double> k_grid;
    std::vector<double> ratios; ///< integral |grad T_k(u)|^p / (k ||f||_1), nodal truncation
    double max_ratio = 0.0;
    /// Same ratio with integral_{|u|<k} |grad u|^p on the exact level set of
    /// the interpolant; differs on cells crossed by |u| = k.
    std::vector<double> restricted_ratios;
    double max_restricted_ratio = 0.0;
};

/// Throws DegenerateInput when f vanishes identically.
AprioriCheck apriori_estimate_check(const Mesh& mesh, const DiscreteFunction& u, const DiscreteFunction& f,
                                    std::span<const double> k_grid, double p);

/// 16 log-spaced levels from 1e-3 max|u| to max|u|.
std::vector<double> default_apriori_levels(const DiscreteFunction& u);

/// integral over {|u| < k} of |grad u|^p for the linear interpolant.
double restricted_gradient_energy(const Mesh& mesh, const DiscreteFunction& u, double k, double p);

/// N(p-1)/(N-p); empty when p >= N.
std::optional<double> u_decay_reference(int N, double p);
/// N(p-1)/(N-1); empty when p >= N.
std::optional<double> grad_decay_reference(int N, double p);

/// Fit window over a threshold grid, by index fraction: the lowest
/// `drop_low` and the highest `drop_high` share of thresholds are excluded.
/// When `relative` is set the window is instead [lo, hi] times the largest
/// threshold.
struct DecayWindow {
    double drop_low = 0.4;
    double drop_high = 0.1;
    std::optional<std::pair<double, double>> relative;
};

struct DecayCheck {
    bool applicable = false; ///< 1 < p < N
    bool has_tail = false;   ///< enough positive, non-constant samples in the window
    double reference = 0.0;
    double fitted = 0.0;     ///< -slope
    double relative_error = 0.0;
    TailFit fit;
    double k_lo = 0.0;
    double k_hi = 0.0;
    DistributionCurve curve;
    std::string note;
};

DecayCheck u_decay_check(const Mesh& mesh, const DiscreteFunction& u, double p, const DecayWindow& window = {},
                         std::size_t n_thresholds = kDefaultThresholdCount);
DecayCheck grad_decay_check(const Mesh& mesh, const DiscreteFunction& u, double p, const DecayWindow& window = {},
                            std::size_t n_thresholds = kDefaultThresholdCount);

struct LevelPair {
    std::size_t a = 0;
    std::size_t b = 0;
};

/// meas{|grad u_a - grad u_b| > t} for every pair a < b and every t.
struct CauchyTable {
    std::vector<LevelPair> pairs;
    std::vector<double> t_grid;
    std::vector<std::vector<double>> measures; ///< [pair][t]
};

CauchyTable cauchy_in_measure(const Mesh& mesh, std::span<const DiscreteFunction> solutions,
                              std::span<const double> t_grid);

/// ||grad T_k(u_a) - grad T_k(u_b)||_p for every pair a < b and every k.
struct TruncationTable {
    std::vector<LevelPair> pairs;
    std::vector<double> k_grid;
    std::vector<std::vector<double>> gaps; ///< [pair][k]
};

TruncationTable truncation_convergence(const Mesh& mesh, std::span<const DiscreteFunction> solutions,
                                       std::span<const double> k_grid, double p);

struct ApproximationOptions {
    std::vector<double> k_grid;  ///< apriori levels; default_apriori_levels of the last stage if empty
    std::vector<double> t_grid;  ///< Cauchy thresholds; 8 log-spaced levels of max|grad u| if empty
    bool warm_start = true;      ///< start each stage from the previous solution
    ResidualMode residual_mode = ResidualMode::consistent;
    DecayWindow u_window;
    DecayWindow grad_window;
    std::size_t decay_thresholds = kDefaultThresholdCount;
};

struct StageRecord {
    double level = 0.0;
    SolveOutcome outcome;
    double data_error = 0.0;       ///< ||f_n - f||_1
    AprioriCheck apriori;          ///< against the stage data f_n
    CertificateSummary certificate; ///< against the original data f
};

struct EntropyReport {
    double p = 0.0;
    int dimension = 0;
    std::vector<StageRecord> stages;
    std::vector<std::string> test_names;
    std::vector<double> certificate_levels;
    DecayCheck u_decay;
    DecayCheck grad_decay;
    TruncationTable truncation;
    CauchyTable cauchy;

    /// The last stage solution, the candidate entropy solution.
    const DiscreteFunction& candidate() const { return stages.back().outcome.solution; }
    bool all_converged() const;
    /// Largest apriori ratio over converged stages.
    double max_apriori_ratio() const;
};

/// Solves -Delta_p u_n = f_n for every level and records the diagnostics.
/// Stage failures are recorded (converged = false) and the pipeline continues.
EntropyReport run_approximation(const Mesh& mesh, const DiscreteFunction& f, const ApproximationSchedule& schedule,
                                const SolverConfig& config, const ApproximationOptions& options = {});

struct UniquenessGap {
    double l1_gap = 0.0;      ///< integral |u_a - u_b|
    double l1_reference = 0.0; ///< integral |u_a|
    double linf_truncation_gap = 0.0; ///< max over k of max |T_k(u_a) - T_k(u_b)|
    bool converged = false;
};

/// Runs schedule_a with warm starts and schedule_b from cold starts and
/// compares the final solutions.
UniquenessGap uniqueness_crosscheck(const Mesh& mesh, const DiscreteFunction& f,
                                    const ApproximationSchedule& schedule_a,
                                    const ApproximationSchedule& schedule_b, const SolverConfig& config,
                                    std::span<const double> k_grid = {});

} // namespace plap
