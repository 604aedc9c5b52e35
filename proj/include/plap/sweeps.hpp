#pragma once

#include "plap/fields.hpp"
#include "plap/solver.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace plap {

/// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
double uniform01(std::mt19937_64& rng);
/// Standard normal by Box-Muller.
double standard_normal(std::mt19937_64& rng);
/// Gaussian direction in R^3 times a log-uniform length in [1e-2, 1e1].
Vec3 random_vector(std::mt19937_64& rng);

struct PiconeSweep {
    double p = 0.0;
    std::size_t samples = 0;
    std::size_t cells_checked = 0;
    std::size_t invalid_cells = 0;
    std::size_t identity_violations = 0; ///< cells with |L - R| > 1e-10 (1 + max |L| of the sample)
    double max_identity_gap = 0.0; ///< max |L - R|
    double max_abs_l = 0.0;
    double min_l = 0.0;
    double max_proportional_l = 0.0; ///< max |L| over the u = k v samples

    /// max |L - R| <= 1e-10 (1 + max |L|), min L >= -1e-12, proportional |L| <= 1e-12.
    bool passed() const noexcept;
};

/// Random u >= 0 in [0, 1] and v in [v_min, v_min + 1] on the mesh, chain-rule
/// Picone field per sample, plus one u = k v sample per draw.
PiconeSweep picone_random_sweep(const Mesh& mesh, double p, std::size_t samples, double v_min,
                                std::mt19937_64& rng);

struct RatioExtremes {
    double max_upper = 0.0;
    double min_sub2_lower = 0.0;
    double min_super2_lower = 0.0;
    std::size_t samples = 0;
};

RatioExtremes sample_inequality_ratios(double p, std::size_t samples, std::mt19937_64& rng);

/// Constants with a factor-two margin on the sampled extremes.
InequalityConstants calibrated_constants(double p, const RatioExtremes& extremes);

struct InequalitySweep {
    double p = 0.0;
    InequalityConstants constants;
    std::size_t pairs = 0;
    std::size_t violations = 0; ///< active slack below -1e-12
    double min_slack = 0.0;
};

InequalitySweep inequality_sweep(double p, const InequalityConstants& constants, std::size_t pairs,
                                 std::mt19937_64& rng);

struct PairingSweep {
    double p = 0.0;
    std::size_t pairs = 0;
    std::size_t violations = 0; ///< pairing below -1e-12
    double min_pairing = 0.0;
};

PairingSweep pairing_sweep(double p, std::size_t pairs, std::mt19937_64& rng);

struct EmbeddingRow {
    std::size_t function = 0;
    double q = 0.0;
    double weak_norm = 0.0;  ///< sup_k k^q phi(k)
    double strong_norm = 0.0; ///< integral |u|^q
};

struct EmbeddingSweep {
    std::vector<EmbeddingRow> rows;
    std::size_t violations = 0; ///< weak_norm > strong_norm + 1e-10
};

/// Random functions: every fourth is a scaled product of sines, the others
/// carry heavy-tailed nodal values.
DiscreteFunction random_function(const Mesh& mesh, std::size_t index, std::mt19937_64& rng);

EmbeddingSweep embedding_sweep(const Mesh& mesh, std::span<const double> q_values, std::size_t count,
                               std::mt19937_64& rng);

} // namespace plap
