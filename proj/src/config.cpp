#include "setmem/config.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

#include "setmem/builtins.hpp"
#include "setmem/csv.hpp"
#include "setmem/errors.hpp"

namespace setmem {
namespace {

using nlohmann::json;

const std::vector<std::size_t> kDefaultCheckpoints = {3, 5, 10, 25, 50, 100, 200};

bool same(const Matrix& a, const Matrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

Matrix matrix_from_json(const json& j, const std::string& what) {
    if (!j.is_array() || j.empty()) throw ConfigError(what + ": expected a nonempty array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            throw ConfigError(what + ": ragged matrix rows");
        }
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    return m;
}

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Vector vector_from_json(const json& j, const std::string& what) {
    if (!j.is_array()) throw ConfigError(what + ": expected an array");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    return v;
}

json vector_to_json(const Vector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

NoiseSet noise_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("noise: expected an object");
    const std::string kind = j.at("kind").get<std::string>();
    try {
        if (kind == "box") {
            Vector lower = vector_from_json(j.at("lower"), "noise.lower");
            Vector upper = vector_from_json(j.at("upper"), "noise.upper");
            // A box collapsed onto the origin selects noise-free data.
            if (lower.size() > 0 && lower.size() == upper.size() && lower.isZero(0.0) && upper.isZero(0.0)) {
                return NoiseSet::zero(lower.size());
            }
            return NoiseSet::box(std::move(lower), std::move(upper));
        }
        if (kind == "polytope") return NoiseSet::polytope(matrix_from_json(j.at("H"), "noise.H"),
                                                          vector_from_json(j.at("h"), "noise.h"));
    } catch (const DimensionError& e) {
        throw ConfigError(std::string("noise: ") + e.what());
    }
    throw ConfigError("noise.kind must be box or polytope");
}

json noise_to_json(const NoiseSet& n) {
    if (n.is_box()) return {{"kind", "box"}, {"lower", vector_to_json(n.lower())}, {"upper", vector_to_json(n.upper())}};
    return {{"kind", "polytope"}, {"H", matrix_to_json(n.halfspace_normals())}, {"h", vector_to_json(n.halfspace_offsets())}};
}

std::string_view to_string(Loss loss) { return loss == Loss::Zero ? "zero" : "squared"; }

Loss parse_loss(const std::string& s) {
    if (s == "squared") return Loss::SquaredResidual;
    if (s == "zero") return Loss::Zero;
    throw ConfigError("loss must be squared or zero");
}

const std::set<std::string> kKnownKeys = {"schema_version", "experiment", "systems",    "noise",
                                          "horizon",        "seeds",      "error_metric", "checkpoints",
                                          "output_dir",     "x0",         "switches",   "trajectory",
                                          "loss",           "ridge"};

ExperimentConfig from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& [key, _] : j.items()) {
        if (!kKnownKeys.count(key)) throw ConfigError("unknown config key '" + key + "'");
    }
    ExperimentConfig c;
    c.schema_version = j.at("schema_version").get<int>();
    if (c.schema_version != kSchemaVersion) {
        throw ConfigError("unsupported schema_version " + std::to_string(c.schema_version));
    }
    c.experiment = parse_experiment_kind(j.at("experiment").get<std::string>());
    if (j.contains("systems")) {
        std::size_t idx = 0;
        for (const auto& s : j.at("systems")) {
            ++idx;
            if (s.is_string()) {
                const auto name = s.get<std::string>();
                auto m = builtins::lookup(name);
                if (!m) throw ConfigError("unknown built-in matrix '" + name + "'");
                c.systems.push_back({name, *m, true});
            } else {
                const std::string name = s.contains("name") ? s.at("name").get<std::string>() : "A" + std::to_string(idx);
                c.systems.push_back({name, matrix_from_json(s.at("rows"), "systems[" + name + "]"), false});
            }
        }
    }
    if (j.contains("noise")) c.noise = noise_from_json(j.at("noise"));
    if (j.contains("horizon")) c.horizon = j.at("horizon").get<std::size_t>();
    if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (j.contains("error_metric")) c.error_metric = parse_error_metric(j.at("error_metric").get<std::string>());
    if (j.contains("checkpoints")) c.checkpoints = j.at("checkpoints").get<std::vector<std::size_t>>();
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("x0")) c.x0 = vector_from_json(j.at("x0"), "x0");
    if (j.contains("switches")) {
        for (auto s : j.at("switches").get<std::vector<std::size_t>>()) {
            if (s == 0) throw ConfigError("switches are 1-based");
            c.switches.push_back(s - 1);
        }
    }
    if (j.contains("trajectory")) c.trajectory = j.at("trajectory").get<std::string>();
    if (j.contains("loss")) c.loss = parse_loss(j.at("loss").get<std::string>());
    if (j.contains("ridge")) c.ridge = j.at("ridge").get<double>();
    return c;
}

}  // namespace

std::string_view to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::CompareOls: return "compare-ols";
        case ExperimentKind::Bandit: return "bandit";
        case ExperimentKind::Simulate: return "simulate";
        case ExperimentKind::Estimate: return "estimate";
        case ExperimentKind::Spectral: return "spectral";
    }
    return "unknown";
}

ExperimentKind parse_experiment_kind(std::string_view text) {
    for (auto k : {ExperimentKind::CompareOls, ExperimentKind::Bandit, ExperimentKind::Simulate,
                   ExperimentKind::Estimate, ExperimentKind::Spectral}) {
        if (to_string(k) == text) return k;
    }
    throw ConfigError("unknown experiment '" + std::string(text) + "'");
}

bool operator==(const NamedMatrix& a, const NamedMatrix& b) {
    return a.name == b.name && a.builtin == b.builtin && same(a.value, b.value);
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
    const bool x0_equal = a.x0.has_value() == b.x0.has_value() && (!a.x0 || same(*a.x0, *b.x0));
    return a.schema_version == b.schema_version && a.experiment == b.experiment && a.systems == b.systems &&
           a.noise == b.noise && a.horizon == b.horizon && a.seeds == b.seeds && a.error_metric == b.error_metric &&
           a.checkpoints == b.checkpoints && a.output_dir == b.output_dir && x0_equal && a.switches == b.switches &&
           a.trajectory == b.trajectory && a.loss == b.loss && a.ridge == b.ridge;
}

Eigen::Index ExperimentConfig::dim() const {
    if (!systems.empty()) return systems.front().value.rows();
    if (noise) return noise->dim();
    return 0;
}

ExperimentConfig ExperimentConfig::resolved() const {
    ExperimentConfig c = *this;
    if (c.systems.empty()) {
        if (c.experiment == ExperimentKind::CompareOls) {
            c.systems.push_back({"A2", builtins::a2(), true});
        } else if (c.experiment == ExperimentKind::Bandit || c.experiment == ExperimentKind::Spectral ||
                   c.experiment == ExperimentKind::Simulate) {
            for (const char* name : {"A1", "A2", "A3", "A4"}) c.systems.push_back({name, *builtins::lookup(name), true});
        }
    }
    Eigen::Index d = c.dim();
    if (c.experiment == ExperimentKind::Estimate && d == 0) {
        throw ConfigError("estimate needs a noise set (or truth systems) to fix the dimension");
    }
    for (const auto& s : c.systems) {
        if (s.value.rows() != s.value.cols() || s.value.rows() != d) {
            throw ConfigError("system '" + s.name + "' must be square with dimension " + std::to_string(d));
        }
    }
    if (!c.noise) c.noise = NoiseSet::cube(d);
    if (c.noise->dim() != d) throw ConfigError("noise dimension does not match the systems");
    if (c.x0 && c.x0->size() != d) throw ConfigError("x0 dimension does not match the systems");
    if (c.seeds.empty()) {
        for (std::uint64_t s = 0; s < 10; ++s) c.seeds.push_back(s);
    }
    if (!c.horizon) c.horizon = c.experiment == ExperimentKind::Bandit ? 300 : 200;
    if (*c.horizon == 0) throw ConfigError("horizon must be positive");
    if (c.experiment == ExperimentKind::CompareOls) {
        if (c.systems.size() != 1) throw ConfigError("compare-ols takes exactly one system");
        if (c.checkpoints.empty()) {
            for (auto n : kDefaultCheckpoints) {
                if (n <= *c.horizon) c.checkpoints.push_back(n);
            }
            if (c.checkpoints.empty() || c.checkpoints.back() != *c.horizon) c.checkpoints.push_back(*c.horizon);
        }
        if (!std::is_sorted(c.checkpoints.begin(), c.checkpoints.end()) || c.checkpoints.front() == 0 ||
            c.checkpoints.back() > *c.horizon) {
            throw ConfigError("checkpoints must be ascending, positive and at most the horizon");
        }
    }
    if (c.experiment == ExperimentKind::Bandit && *c.horizon <= c.systems.size()) {
        throw ConfigError("bandit horizon must exceed the number of systems");
    }
    if (c.experiment == ExperimentKind::Estimate && !c.trajectory) throw ConfigError("estimate needs 'trajectory'");
    for (auto s : c.switches) {
        if (s >= c.systems.size()) throw ConfigError("switch index exceeds the number of systems");
    }
    if (!(c.ridge >= 0.0)) throw ConfigError("ridge must be nonnegative");
    return c;
}

ExperimentConfig parse_config(std::string_view json_text) {
    try {
        return from_json(json::parse(json_text));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    ExperimentConfig c = parse_config(csv::read_file(path));
    if (c.trajectory && c.trajectory->is_relative()) c.trajectory = path.parent_path() / *c.trajectory;
    return c;
}

std::string serialize_config(const ExperimentConfig& c) {
    json j;
    j["schema_version"] = c.schema_version;
    j["experiment"] = std::string(to_string(c.experiment));
    if (!c.systems.empty()) {
        json systems = json::array();
        for (const auto& s : c.systems) {
            if (s.builtin) {
                systems.push_back(s.name);
            } else {
                systems.push_back({{"name", s.name}, {"rows", matrix_to_json(s.value)}});
            }
        }
        j["systems"] = std::move(systems);
    }
    if (c.noise) j["noise"] = noise_to_json(*c.noise);
    if (c.horizon) j["horizon"] = *c.horizon;
    if (!c.seeds.empty()) j["seeds"] = c.seeds;
    j["error_metric"] = std::string(to_string(c.error_metric));
    if (!c.checkpoints.empty()) j["checkpoints"] = c.checkpoints;
    j["output_dir"] = c.output_dir.string();
    if (c.x0) j["x0"] = vector_to_json(*c.x0);
    if (!c.switches.empty()) {
        json sw = json::array();
        for (auto s : c.switches) sw.push_back(s + 1);
        j["switches"] = std::move(sw);
    }
    if (c.trajectory) j["trajectory"] = c.trajectory->string();
    j["loss"] = std::string(to_string(c.loss));
    j["ridge"] = c.ridge;
    return j.dump(2) + "\n";
}

}  // namespace setmem
