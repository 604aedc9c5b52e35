#pragma once

#include "plap/mesh.hpp"

#include <span>
#include <vector>

namespace plap {

/// Nodal values of a piecewise-linear function on a mesh.
class DiscreteFunction {
public:
    DiscreteFunction() = default;
    DiscreteFunction(const Mesh& mesh, std::vector<double> values);

    static DiscreteFunction zeros(const Mesh& mesh);
    static DiscreteFunction constant(const Mesh& mesh, double c);

    /// A function on the same mesh with new nodal values.
    DiscreteFunction with_values(std::vector<double> values) const;

    MeshId mesh_id() const noexcept { return mesh_; }
    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    std::span<const double> values() const noexcept { return values_; }

    /// Throws DomainError unless the function lives on `mesh`.
    void require_mesh(const Mesh& mesh, const char* context) const;

    double max_abs() const noexcept;

    DiscreteFunction& operator+=(const DiscreteFunction& other);
    DiscreteFunction& operator-=(const DiscreteFunction& other);
    DiscreteFunction& operator*=(double s) noexcept;

    friend DiscreteFunction operator+(DiscreteFunction a, const DiscreteFunction& b) { return a += b; }
    friend DiscreteFunction operator-(DiscreteFunction a, const DiscreteFunction& b) { return a -= b; }
    friend DiscreteFunction operator*(double s, DiscreteFunction a) { return a *= s; }

private:
    MeshId mesh_{};
    std::vector<double> values_;
};

/// Cellwise-constant tangent vectors in embedding coordinates (the P1 gradient).
class GradientField {
public:
    GradientField() = default;
    GradientField(MeshId mesh, std::vector<Vec3> vectors) : mesh_(mesh), vectors_(std::move(vectors)) {}

    MeshId mesh_id() const noexcept { return mesh_; }
    std::size_t size() const noexcept { return vectors_.size(); }
    const Vec3& operator[](std::size_t c) const { return vectors_[c]; }
    std::span<const Vec3> vectors() const noexcept { return vectors_; }

    /// Euclidean magnitude per cell.
    std::vector<double> magnitudes() const;

private:
    MeshId mesh_{};
    std::vector<Vec3> vectors_;
};

/// Sampled distribution function k -> meas{|u| > k}.
struct DistributionCurve {
    std::vector<double> thresholds; // strictly increasing, positive
    std::vector<double> measures;   // non-increasing, nonnegative

    bool empty() const noexcept { return thresholds.empty(); }
};

inline double dot(const Vec3& a, const Vec3& b) noexcept { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec3& a) noexcept { return std::sqrt(dot(a, a)); }

/// T_k(s) = clamp(s, -k, k).
inline double truncate_value(double s, double k) noexcept { return s > k ? k : (s < -k ? -k : s); }

DiscreteFunction truncate(const DiscreteFunction& u, double k);

GradientField gradient(const Mesh& mesh, const DiscreteFunction& u);

/// Gradient of u on one cell.
Vec3 cell_gradient(const Mesh& mesh, std::span<const double> nodal, std::size_t c);

struct TruncationGradientReport {
    double interior_discrepancy = 0.0;  ///< max |grad T_k u - grad u| over cells with all |u| < k
    double saturated_discrepancy = 0.0; ///< max |grad T_k u| over cells with all u > k or all u < -k
    std::size_t interior_cells = 0;
    std::size_t saturated_cells = 0;
    std::size_t mixed_cells = 0;        ///< cells crossed by a level set |u| = k
    double mixed_discrepancy = 0.0;     ///< max |grad T_k u - grad u| on mixed cells
};

TruncationGradientReport truncation_gradient_check(const Mesh& mesh, const DiscreteFunction& u, double k);

/// Mean of |u|^p over a segment or triangle on which u is affine with the
/// given nodal values. Exact up to rounding (divided differences of the
/// antiderivatives of |x|^p).
double simplex_power_mean(std::span<const double> values, double p);

/// (integral |u|^p)^(1/p) of the P1 interpolant, integrated exactly per cell.
double lp_norm(const Mesh& mesh, const DiscreteFunction& u, double p);
/// Same with a fixed quadrature rule.
double lp_norm(const Mesh& mesh, const DiscreteFunction& u, double p, const QuadratureRule& rule);
double grad_lp_norm(const Mesh& mesh, const GradientField& g, double p);
double w1p_norm(const Mesh& mesh, const DiscreteFunction& u, double p);

/// Integral of |u| for the P1 interpolant, exact (cells split at sign changes).
double abs_integral(const Mesh& mesh, const DiscreteFunction& u);

/// Volume-weighted mean of the P1 interpolant.
double mean_value(const Mesh& mesh, const DiscreteFunction& u);

/// Exact measure of {|u| > k} of the linear interpolant for each threshold.
DistributionCurve distribution_function(const Mesh& mesh, const DiscreteFunction& u,
                                        std::span<const double> thresholds);

/// Distribution function of a cellwise-constant nonnegative field (cell-volume sums).
DistributionCurve cell_distribution_function(const Mesh& mesh, std::span<const double> cell_values,
                                             std::span<const double> thresholds);

std::vector<double> log_spaced(double lo, double hi, std::size_t count);

inline constexpr std::size_t kDefaultThresholdCount = 64;

/// Log-spaced thresholds between the smallest positive and the largest of |values|.
std::vector<double> default_thresholds(std::span<const double> values,
                                       std::size_t count = kDefaultThresholdCount);

/// sup_k k^q phi(k) over the sampled thresholds.
double marcinkiewicz_norm(const DistributionCurve& curve, double q);

struct LayerCake {
    double lhs = 0.0; ///< integral |u|^q, exact per cell
    double rhs = 0.0; ///< q * integral t^(q-1) phi(t) dt, composite rule on [0, max|u|]

    double relative_gap() const noexcept;
};

LayerCake layer_cake_check(const Mesh& mesh, const DiscreteFunction& u, double q, std::size_t n_thresholds);

struct TailFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::size_t samples = 0;
};

/// Least-squares line through (log k, log phi(k)) for k in [k_lo, k_hi], phi > 0.
/// Throws DegenerateInput with fewer than 4 usable samples.
TailFit tail_exponent_fit(const DistributionCurve& curve, double k_lo, double k_hi);

/// ||u - mean(u)||_p / ||grad u||_p. Throws DegenerateInput when grad u == 0.
double poincare_ratio(const Mesh& mesh, const DiscreteFunction& u, double p);

} // namespace plap
