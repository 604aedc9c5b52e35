#include "plap/cli/config.hpp"

#include "plap/cli/json_locator.hpp"
#include "plap/csv.hpp"
#include "plap/data.hpp"
#include "plap/error.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

namespace plap::cli {

using nlohmann::json;

std::size_t RunConfig::line_of(const std::string& pointer) const
{
    std::string p = pointer;
    while (true) {
        if (const auto it = lines.find(p); it != lines.end())
            return it->second;
        if (p.empty())
            return 1;
        p.erase(p.rfind('/'));
    }
}

namespace {

class Reader {
public:
    explicit Reader(const std::map<std::string, std::size_t>& lines) : lines_(lines) {}

    [[noreturn]] void fail(const std::string& pointer, const std::string& what) const
    {
        std::string p = pointer;
        while (true) {
            if (const auto it = lines_.find(p); it != lines_.end())
                throw ParseError(it->second, what);
            if (p.empty())
                throw ParseError(1, what);
            p.erase(p.rfind('/'));
        }
    }

    void object(const json& j, const std::string& ptr, std::initializer_list<const char*> allowed) const
    {
        if (!j.is_object())
            fail(ptr, label(ptr) + " must be an object");
        const std::set<std::string> keys(allowed.begin(), allowed.end());
        for (const auto& [k, v] : j.items())
            if (!keys.contains(k))
                fail(ptr + "/" + k, "unknown key \"" + k + "\"" + where(ptr));
    }

    const json& require(const json& j, const std::string& ptr, const char* key) const
    {
        if (!j.contains(key))
            fail(ptr, "missing key \"" + std::string(key) + "\"" + where(ptr));
        return j.at(key);
    }

    double number(const json& j, const std::string& ptr) const
    {
        if (!j.is_number())
            fail(ptr, label(ptr) + " must be a number");
        const double x = j.get<double>();
        if (!std::isfinite(x))
            fail(ptr, label(ptr) + " must be finite");
        return x;
    }

    double number(const json& obj, const std::string& ptr, const char* key, double fallback) const
    {
        return obj.contains(key) ? number(obj.at(key), ptr + "/" + key) : fallback;
    }

    double positive(const json& obj, const std::string& ptr, const char* key, double fallback) const
    {
        const double x = number(obj, ptr, key, fallback);
        if (!(x > 0.0))
            fail(ptr + "/" + key, std::string(key) + " must be positive");
        return x;
    }

    long long integer(const json& j, const std::string& ptr) const
    {
        if (!j.is_number_integer())
            fail(ptr, label(ptr) + " must be an integer");
        return j.get<long long>();
    }

    long long integer(const json& obj, const std::string& ptr, const char* key, long long fallback,
                      long long min_value) const
    {
        if (!obj.contains(key))
            return fallback;
        const long long v = integer(obj.at(key), ptr + "/" + key);
        if (v < min_value)
            fail(ptr + "/" + key, std::string(key) + " must be at least " + std::to_string(min_value));
        return v;
    }

    bool boolean(const json& obj, const std::string& ptr, const char* key, bool fallback) const
    {
        if (!obj.contains(key))
            return fallback;
        if (!obj.at(key).is_boolean())
            fail(ptr + "/" + key, std::string(key) + " must be true or false");
        return obj.at(key).get<bool>();
    }

    std::string string(const json& j, const std::string& ptr) const
    {
        if (!j.is_string())
            fail(ptr, label(ptr) + " must be a string");
        return j.get<std::string>();
    }

    std::string choice(const json& obj, const std::string& ptr, const char* key, std::string fallback,
                       std::initializer_list<const char*> options) const
    {
        if (!obj.contains(key))
            return fallback;
        const std::string v = string(obj.at(key), ptr + "/" + key);
        std::string list;
        for (const char* o : options) {
            if (v == o)
                return v;
            list += list.empty() ? "" : ", ";
            list += o;
        }
        fail(ptr + "/" + key, std::string(key) + " must be one of: " + list);
    }

    std::vector<double> numbers(const json& j, const std::string& ptr) const
    {
        if (!j.is_array())
            fail(ptr, label(ptr) + " must be an array of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < j.size(); ++i)
            out.push_back(number(j[i], ptr + "/" + std::to_string(i)));
        return out;
    }

    std::vector<double> positive_increasing(const json& j, const std::string& ptr) const
    {
        std::vector<double> v = numbers(j, ptr);
        for (std::size_t i = 0; i < v.size(); ++i) {
            const std::string at = ptr + "/" + std::to_string(i);
            if (!(v[i] > 0.0))
                fail(at, label(ptr) + " entries must be positive");
            if (i > 0 && !(v[i] > v[i - 1]))
                fail(at, label(ptr) + " must be strictly increasing");
        }
        return v;
    }

private:
    static std::string label(const std::string& ptr)
    {
        if (ptr.empty())
            return "config";
        return ptr.substr(ptr.rfind('/') + 1);
    }

    static std::string where(const std::string& ptr)
    {
        return ptr.empty() ? "" : " in \"" + ptr.substr(1) + "\"";
    }

    const std::map<std::string, std::size_t>& lines_;
};

void check_p(const Reader& r, double p, const std::string& ptr)
{
    if (!(p > 1.0))
        r.fail(ptr, "p must exceed 1");
}

MeshSpec read_mesh(const Reader& r, const json& j)
{
    const std::string ptr = "/mesh";
    MeshSpec m;
    if (!j.is_object())
        r.fail(ptr, "mesh must be an object");
    m.family = r.string(r.require(j, ptr, "family"), ptr + "/family");
    if (m.family == "interval") {
        r.object(j, ptr, {"family", "cells", "length"});
        r.require(j, ptr, "cells");
        m.n_cells = static_cast<int>(r.integer(j, ptr, "cells", 0, 2));
        m.length = r.positive(j, ptr, "length", 1.0);
    } else if (m.family == "torus" || m.family == "rectangle") {
        r.object(j, ptr, {"family", "nx", "ny", "lx", "ly"});
        r.require(j, ptr, "nx");
        r.require(j, ptr, "ny");
        const long long min_cells = m.family == "torus" ? 3 : 2;
        m.nx = static_cast<int>(r.integer(j, ptr, "nx", 0, min_cells));
        m.ny = static_cast<int>(r.integer(j, ptr, "ny", 0, min_cells));
        m.lx = r.positive(j, ptr, "lx", 1.0);
        m.ly = r.positive(j, ptr, "ly", 1.0);
    } else if (m.family == "sphere") {
        r.object(j, ptr, {"family", "subdivisions", "radius"});
        r.require(j, ptr, "subdivisions");
        m.subdivisions = static_cast<int>(r.integer(j, ptr, "subdivisions", 0, 0));
        if (m.subdivisions > kMaxSphereSubdivisions)
            r.fail(ptr + "/subdivisions", "subdivisions must be at most " + std::to_string(kMaxSphereSubdivisions));
        m.radius = r.positive(j, ptr, "radius", 1.0);
    } else if (m.family == "file") {
        r.object(j, ptr, {"family", "path"});
        m.path = r.string(r.require(j, ptr, "path"), ptr + "/path");
    } else {
        r.fail(ptr + "/family", "family must be one of: interval, torus, rectangle, sphere, file");
    }
    return m;
}

void read_line_search(const Reader& r, const json& j, const std::string& ptr, LineSearch& ls)
{
    r.object(j, ptr, {"shrink", "decrease"});
    ls.shrink = r.number(j, ptr, "shrink", ls.shrink);
    if (!(ls.shrink > 0.0 && ls.shrink < 1.0))
        r.fail(ptr + "/shrink", "shrink must lie in (0, 1)");
    ls.decrease = r.number(j, ptr, "decrease", ls.decrease);
    if (!(ls.decrease > 0.0 && ls.decrease < 0.5))
        r.fail(ptr + "/decrease", "decrease must lie in (0, 0.5)");
}

void read_solver(const Reader& r, const json& j, SolverConfig& s)
{
    const std::string ptr = "/solver";
    r.object(j, ptr, {"epsilon", "grad_tol", "max_iter", "bc_mode", "epsilon0", "line_search", "compatibility_tol"});
    s.epsilon = r.number(j, ptr, "epsilon", s.epsilon);
    if (s.epsilon < 0.0)
        r.fail(ptr + "/epsilon", "epsilon must be nonnegative");
    s.grad_tol = r.positive(j, ptr, "grad_tol", s.grad_tol);
    s.max_iter = static_cast<int>(r.integer(j, ptr, "max_iter", s.max_iter, 1));
    s.bc_mode = r.choice(j, ptr, "bc_mode", "dirichlet_zero", {"dirichlet_zero", "zero_mean"}) == "zero_mean"
                    ? BoundaryMode::zero_mean
                    : BoundaryMode::dirichlet_zero;
    s.epsilon0 = r.positive(j, ptr, "epsilon0", s.epsilon0);
    s.compatibility_tol = r.positive(j, ptr, "compatibility_tol", s.compatibility_tol);
    if (j.contains("line_search"))
        read_line_search(r, j.at("line_search"), ptr + "/line_search", s.line_search);
}

ScheduleSpec read_schedule(const Reader& r, const json& j, const std::string& ptr)
{
    r.object(j, ptr, {"levels", "mode", "relative"});
    ScheduleSpec s;
    s.schedule.levels = r.positive_increasing(r.require(j, ptr, "levels"), ptr + "/levels");
    if (s.schedule.levels.size() < 2)
        r.fail(ptr + "/levels", "levels must hold at least two entries");
    s.schedule.mode = r.choice(j, ptr, "mode", "truncate_data", {"truncate_data", "clip_and_rescale"}) ==
                              "clip_and_rescale"
                          ? ScheduleMode::clip_and_rescale
                          : ScheduleMode::truncate_data;
    s.relative_to_data = r.boolean(j, ptr, "relative", false);
    return s;
}

DecayWindow read_window(const Reader& r, const json& j, const std::string& ptr)
{
    r.object(j, ptr, {"drop_low", "drop_high", "relative"});
    DecayWindow w;
    w.drop_low = r.number(j, ptr, "drop_low", w.drop_low);
    w.drop_high = r.number(j, ptr, "drop_high", w.drop_high);
    if (!(w.drop_low >= 0.0 && w.drop_high >= 0.0 && w.drop_low + w.drop_high < 1.0))
        r.fail(ptr, "drop_low and drop_high must be nonnegative with sum below 1");
    if (j.contains("relative")) {
        const auto rel = r.numbers(j.at("relative"), ptr + "/relative");
        if (rel.size() != 2 || !(rel[0] > 0.0 && rel[0] < rel[1] && rel[1] <= 1.0))
            r.fail(ptr + "/relative", "relative must be [lo, hi] with 0 < lo < hi <= 1");
        w.relative = std::make_pair(rel[0], rel[1]);
    }
    return w;
}

void read_entropy(const Reader& r, const json& j, EntropySpec& e)
{
    const std::string ptr = "/entropy";
    r.object(j, ptr,
             {"k_grid", "t_grid", "warm_start", "residual_mode", "u_window", "grad_window", "decay_thresholds",
              "apriori_bound", "certificate_bound"});
    if (j.contains("k_grid"))
        e.k_grid = r.positive_increasing(j.at("k_grid"), ptr + "/k_grid");
    if (j.contains("t_grid"))
        e.t_grid = r.positive_increasing(j.at("t_grid"), ptr + "/t_grid");
    e.warm_start = r.boolean(j, ptr, "warm_start", e.warm_start);
    e.residual_mode = r.choice(j, ptr, "residual_mode", "consistent", {"consistent", "exact_geometry"}) ==
                              "exact_geometry"
                          ? ResidualMode::exact_geometry
                          : ResidualMode::consistent;
    if (j.contains("u_window"))
        e.u_window = read_window(r, j.at("u_window"), ptr + "/u_window");
    if (j.contains("grad_window"))
        e.grad_window = read_window(r, j.at("grad_window"), ptr + "/grad_window");
    e.decay_thresholds = static_cast<std::size_t>(r.integer(j, ptr, "decay_thresholds", 64, 8));
    e.apriori_bound = r.positive(j, ptr, "apriori_bound", e.apriori_bound);
    if (j.contains("certificate_bound"))
        e.certificate_bound = r.positive(j, ptr, "certificate_bound", 1.0);
}

void read_estimates(const Reader& r, const json& j, EstimatesSpec& e)
{
    const std::string ptr = "/estimates";
    r.object(j, ptr,
             {"q_values", "layer_cake_thresholds", "layer_cake_tolerance", "random_functions", "random_pairs",
              "calibration_samples", "pairing_p", "inequalities"});
    if (j.contains("q_values")) {
        e.q_values = r.numbers(j.at("q_values"), ptr + "/q_values");
        for (std::size_t i = 0; i < e.q_values.size(); ++i)
            if (!(e.q_values[i] >= 1.0))
                r.fail(ptr + "/q_values/" + std::to_string(i), "q_values entries must be at least 1");
    }
    e.layer_cake_thresholds = static_cast<std::size_t>(
        r.integer(j, ptr, "layer_cake_thresholds", static_cast<long long>(e.layer_cake_thresholds), 1));
    e.layer_cake_tolerance = r.positive(j, ptr, "layer_cake_tolerance", e.layer_cake_tolerance);
    e.random_functions = static_cast<std::size_t>(
        r.integer(j, ptr, "random_functions", static_cast<long long>(e.random_functions), 0));
    e.random_pairs =
        static_cast<std::size_t>(r.integer(j, ptr, "random_pairs", static_cast<long long>(e.random_pairs), 0));
    e.calibration_samples = static_cast<std::size_t>(
        r.integer(j, ptr, "calibration_samples", static_cast<long long>(e.calibration_samples), 1));
    if (j.contains("pairing_p")) {
        e.pairing_p = r.numbers(j.at("pairing_p"), ptr + "/pairing_p");
        for (std::size_t i = 0; i < e.pairing_p.size(); ++i)
            check_p(r, e.pairing_p[i], ptr + "/pairing_p/" + std::to_string(i));
    }
    if (j.contains("inequalities")) {
        const std::string iptr = ptr + "/inequalities";
        const json& arr = j.at("inequalities");
        if (!arr.is_array())
            r.fail(iptr, "inequalities must be an array");
        e.inequalities.clear();
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const std::string eptr = iptr + "/" + std::to_string(i);
            const json& item = arr[i];
            r.object(item, eptr, {"p", "sub2_upper", "sub2_lower", "super2_lower"});
            InequalitySpec spec;
            spec.p = r.number(r.require(item, eptr, "p"), eptr + "/p");
            check_p(r, spec.p, eptr + "/p");
            if (item.contains("sub2_upper") || item.contains("sub2_lower") || item.contains("super2_lower")) {
                InequalityConstants c;
                c.sub2_upper = r.number(item, eptr, "sub2_upper", c.sub2_upper);
                c.sub2_lower = r.number(item, eptr, "sub2_lower", c.sub2_lower);
                c.super2_lower = r.number(item, eptr, "super2_lower", c.super2_lower);
                spec.constants = c;
            }
            e.inequalities.push_back(spec);
        }
    }
}

SemilinearSpec read_semilinear(const Reader& r, const json& j, const std::string& ptr)
{
    r.object(j, ptr, {"h", "lambda", "q", "mu"});
    SemilinearSpec s;
    if (j.contains("h"))
        s.h = r.string(j.at("h"), ptr + "/h");
    s.lambda = r.positive(j, ptr, "lambda", s.lambda);
    s.q = r.positive(j, ptr, "q", s.q);
    s.mu = r.positive(j, ptr, "mu", s.mu);
    if (s.mu > 1.0)
        r.fail(ptr + "/mu", "mu must lie in (0, 1]");
    return s;
}

void read_picone(const Reader& r, const json& j, PiconeSpec& pc)
{
    const std::string ptr = "/picone";
    r.object(j, ptr, {"p_values", "samples", "v_min", "semilinear"});
    if (j.contains("p_values")) {
        pc.p_values = r.numbers(j.at("p_values"), ptr + "/p_values");
        if (pc.p_values.empty())
            r.fail(ptr + "/p_values", "p_values must not be empty");
        for (std::size_t i = 0; i < pc.p_values.size(); ++i)
            check_p(r, pc.p_values[i], ptr + "/p_values/" + std::to_string(i));
    }
    pc.samples = static_cast<std::size_t>(r.integer(j, ptr, "samples", static_cast<long long>(pc.samples), 1));
    pc.v_min = r.positive(j, ptr, "v_min", pc.v_min);
    if (j.contains("semilinear"))
        pc.semilinear = read_semilinear(r, j.at("semilinear"), ptr + "/semilinear");
}

void read_compare(const Reader& r, const json& j, CompareSpec& c)
{
    const std::string ptr = "/compare";
    r.object(j, ptr, {"schedule_b", "l1_tolerance"});
    if (j.contains("schedule_b"))
        c.schedule_b = read_schedule(r, j.at("schedule_b"), ptr + "/schedule_b");
    c.l1_tolerance = r.positive(j, ptr, "l1_tolerance", c.l1_tolerance);
}

void read_convergence(const Reader& r, const json& j, ConvergenceSpec& c)
{
    const std::string ptr = "/convergence";
    r.object(j, ptr, {"sizes", "min_order"});
    if (j.contains("sizes")) {
        const auto sizes = r.positive_increasing(j.at("sizes"), ptr + "/sizes");
        if (sizes.size() < 2)
            r.fail(ptr + "/sizes", "sizes must hold at least two entries");
        c.sizes.clear();
        for (std::size_t i = 0; i < sizes.size(); ++i) {
            if (sizes[i] != std::floor(sizes[i]) || sizes[i] < 2.0)
                r.fail(ptr + "/sizes/" + std::to_string(i), "sizes entries must be integers of at least 2");
            c.sizes.push_back(static_cast<int>(sizes[i]));
        }
    }
    if (j.contains("min_order"))
        c.min_order = r.number(j.at("min_order"), ptr + "/min_order");
}

} // namespace

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        const std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
        std::string what = e.what();
        if (const auto pos = what.find("parse error"); pos != std::string::npos)
            what = what.substr(pos);
        throw ParseError(line_at(text, byte), "invalid JSON: " + what);
    }

    RunConfig cfg;
    cfg.base_dir = base_dir;
    cfg.lines = locate_values(text);
    const Reader r(cfg.lines);

    r.object(doc, "",
             {"schema", "mesh", "data", "p", "solver", "schedule", "entropy", "estimates", "picone", "compare",
              "convergence", "output", "seed"});
    const std::string schema = r.string(r.require(doc, "", "schema"), "/schema");
    if (schema != kSchemaVersion)
        r.fail("/schema", "schema must be \"" + std::string(kSchemaVersion) + "\"");

    cfg.mesh = read_mesh(r, r.require(doc, "", "mesh"));
    if (doc.contains("data"))
        cfg.data = r.string(doc.at("data"), "/data");

    cfg.solver.p = r.number(r.require(doc, "", "p"), "/p");
    check_p(r, cfg.solver.p, "/p");
    if (doc.contains("solver"))
        read_solver(r, doc.at("solver"), cfg.solver);
    try {
        cfg.solver.validate();
    } catch (const DomainError& e) {
        r.fail("/solver", e.what());
    }

    if (doc.contains("schedule"))
        cfg.schedule = read_schedule(r, doc.at("schedule"), "/schedule");
    if (doc.contains("entropy"))
        read_entropy(r, doc.at("entropy"), cfg.entropy);
    if (doc.contains("estimates"))
        read_estimates(r, doc.at("estimates"), cfg.estimates);
    if (doc.contains("picone"))
        read_picone(r, doc.at("picone"), cfg.picone);
    if (doc.contains("compare"))
        read_compare(r, doc.at("compare"), cfg.compare);
    if (doc.contains("convergence"))
        read_convergence(r, doc.at("convergence"), cfg.convergence);
    if (doc.contains("output"))
        cfg.output = r.string(doc.at("output"), "/output");
    if (doc.contains("seed")) {
        const json& s = doc.at("seed");
        if (!s.is_number_unsigned())
            r.fail("/seed", "seed must be a nonnegative integer");
        cfg.seed = s.get<std::uint64_t>();
    }

    cfg.canonical_json = doc.dump();
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot read config '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.parent_path());
}

Mesh build_mesh(const MeshSpec& spec, const std::filesystem::path& base_dir)
{
    if (spec.family == "interval")
        return build_interval_mesh(spec.n_cells, spec.length);
    if (spec.family == "torus")
        return build_flat_torus_mesh(spec.nx, spec.ny, spec.lx, spec.ly);
    if (spec.family == "rectangle")
        return build_rectangle_mesh(spec.nx, spec.ny, spec.lx, spec.ly);
    if (spec.family == "sphere")
        return build_triangulated_sphere(spec.subdivisions, spec.radius);
    if (spec.family == "file")
        return load_mesh(spec.path.is_absolute() ? spec.path : base_dir / spec.path);
    throw DomainError("unknown mesh family '" + spec.family + "'");
}

namespace {

double parse_number(std::string_view text, std::string_view spec)
{
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), x);
    if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(x))
        throw DomainError("malformed datum '" + std::string(spec) + "'");
    return x;
}

} // namespace

DiscreteFunction make_datum(const Mesh& mesh, std::string_view spec, const std::filesystem::path& base_dir)
{
    const auto colon = spec.find(':');
    if (colon == std::string_view::npos)
        throw DomainError("datum '" + std::string(spec) + "' must look like <kind>:<argument>");
    const std::string_view kind = spec.substr(0, colon);
    const std::string_view arg = spec.substr(colon + 1);
    if (kind == "constant")
        return DiscreteFunction::constant(mesh, parse_number(arg, spec));
    if (kind == "sin")
        return sin_datum(mesh, parse_number(arg, spec));
    if (kind == "spike") {
        if (arg == "center")
            return spike_datum(mesh, center_vertex(mesh));
        const double v = parse_number(arg, spec);
        if (v < 0.0 || v != std::floor(v) || v >= static_cast<double>(mesh.num_vertices()))
            throw DomainError("spike vertex " + std::string(arg) + " is not a vertex of the mesh");
        return spike_datum(mesh, static_cast<Index>(v));
    }
    if (kind == "file") {
        std::filesystem::path path{std::string(arg)};
        if (!path.is_absolute())
            path = base_dir / path;
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw DomainError("cannot read data file '" + path.string() + "'");
        std::ostringstream buf;
        buf << in.rdbuf();
        try {
            return {mesh, parse_function_csv(buf.str(), mesh.num_vertices())};
        } catch (const ParseError& e) {
            throw DomainError("data file '" + path.filename().string() + "' " + e.what());
        }
    }
    throw DomainError("unknown datum kind '" + std::string(kind) + "' (constant, spike, sin, file)");
}

} // namespace plap::cli
