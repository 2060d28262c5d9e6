#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "setmem/estimators.hpp"
#include "setmem/linalg.hpp"
#include "setmem/noise_model.hpp"

namespace setmem {

inline constexpr int kSchemaVersion = 1;

enum class ExperimentKind { CompareOls, Bandit, Simulate, Estimate, Spectral };

std::string_view to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(std::string_view text);

// A matrix given inline or by built-in name ("A1".."A4").
struct NamedMatrix {
    std::string name;
    Matrix value;
    bool builtin = false;

    friend bool operator==(const NamedMatrix& a, const NamedMatrix& b);
};

// JSON experiment description. Unset optional fields take the per-experiment
// defaults from resolved().
struct ExperimentConfig {
    int schema_version = kSchemaVersion;
    ExperimentKind experiment = ExperimentKind::CompareOls;
    std::vector<NamedMatrix> systems;
    std::optional<NoiseSet> noise;
    std::optional<std::size_t> horizon;
    std::vector<std::uint64_t> seeds;
    ErrorMetric error_metric = ErrorMetric::Frobenius;
    std::vector<std::size_t> checkpoints;
    std::filesystem::path output_dir = "out";
    std::optional<Vector> x0;
    std::vector<std::size_t> switches;  // 0-based; serialized 1-based
    std::optional<std::filesystem::path> trajectory;
    Loss loss = Loss::SquaredResidual;
    double ridge = kDefaultRidge;

    // Fills defaults: systems (A2 for compare-ols, A1..A4 for bandit),
    // noise [-1,1]^d, horizon (200 / 300), seeds 0..9, checkpoints.
    // Throws ConfigError when the result is inconsistent.
    ExperimentConfig resolved() const;

    Eigen::Index dim() const;

    friend bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);
};

// Throws ConfigError on malformed input or a schema_version mismatch.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const ExperimentConfig& config);

}  // namespace setmem
