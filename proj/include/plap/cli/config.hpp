#pragma once

#include "plap/entropy.hpp"
#include "plap/mesh.hpp"
#include "plap/solver.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace plap::cli {

inline constexpr std::string_view kSchemaVersion = "plap-config/1";

struct MeshSpec {
    std::string family; ///< interval, torus, rectangle, sphere, file
    int n_cells = 0;
    double length = 1.0;
    int nx = 0;
    int ny = 0;
    double lx = 1.0;
    double ly = 1.0;
    int subdivisions = 0;
    double radius = 1.0;
    std::filesystem::path path;
};

struct ScheduleSpec {
    ApproximationSchedule schedule;
    /// Levels given as multiples of max|f| instead of absolute heights.
    bool relative_to_data = false;
};

struct EntropySpec {
    std::vector<double> k_grid;
    std::vector<double> t_grid;
    bool warm_start = true;
    ResidualMode residual_mode = ResidualMode::consistent;
    DecayWindow u_window;
    DecayWindow grad_window;
    std::size_t decay_thresholds = kDefaultThresholdCount;
    double apriori_bound = 1.05;
    std::optional<double> certificate_bound; ///< on the scaled certificate; default 50 grad_tol
};

struct InequalitySpec {
    double p = 2.0;
    std::optional<InequalityConstants> constants; ///< calibrated when absent
};

struct EstimatesSpec {
    std::vector<double> q_values{1.0, 1.5, 2.0, 3.0};
    std::size_t layer_cake_thresholds = 10000;
    double layer_cake_tolerance = 1e-3;
    std::size_t random_functions = 100;
    std::size_t random_pairs = 100000;
    std::size_t calibration_samples = 1000000;
    std::vector<double> pairing_p{1.3, 2.0, 4.0};
    std::vector<InequalitySpec> inequalities{{1.5, std::nullopt}, {3.0, std::nullopt}};
};

struct SemilinearSpec {
    std::string h = "constant:1";
    double lambda = 1.0;
    double q = 0.5;
    double mu = 0.5;
};

struct PiconeSpec {
    std::vector<double> p_values{1.3, 2.0, 4.0};
    std::size_t samples = 1000;
    double v_min = 0.5;
    std::optional<SemilinearSpec> semilinear;
};

struct CompareSpec {
    std::optional<ScheduleSpec> schedule_b;
    double l1_tolerance = 1e-3; ///< relative to ||u_a||_1
};

struct ConvergenceSpec {
    std::vector<int> sizes{32, 64, 128, 256};
    std::optional<double> min_order;
};

struct RunConfig {
    MeshSpec mesh;
    std::string data = "constant:1";
    SolverConfig solver;
    std::optional<ScheduleSpec> schedule;
    EntropySpec entropy;
    EstimatesSpec estimates;
    PiconeSpec picone;
    CompareSpec compare;
    ConvergenceSpec convergence;
    std::optional<std::filesystem::path> output;
    std::uint64_t seed = 0;

    /// Directory of the config file; relative paths resolve against it.
    std::filesystem::path base_dir;
    /// The parsed document, echoed into the manifest.
    std::string canonical_json;
    /// JSON pointer -> 1-based line, for diagnostics raised after parsing.
    std::map<std::string, std::size_t> lines;

    /// Line of the value at `pointer`, or of its closest recorded ancestor.
    std::size_t line_of(const std::string& pointer) const;
};

/// Parses and validates a config document. Throws ParseError carrying the
/// line of the offending value (or of the enclosing object for missing keys).
RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});

RunConfig load_config(const std::filesystem::path& path);

/// Builds the mesh described by the spec.
Mesh build_mesh(const MeshSpec& spec, const std::filesystem::path& base_dir);

/// Resolves "constant:<c>", "spike:<vertex|center>", "sin:<frequency>" or
/// "file:<path>" (a node_index,value CSV) on the mesh. Throws DomainError.
DiscreteFunction make_datum(const Mesh& mesh, std::string_view spec, const std::filesystem::path& base_dir);

} // namespace plap::cli
