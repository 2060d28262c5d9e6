#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "setmem/config.hpp"
#include "setmem/policy.hpp"
#include "setmem/spectral.hpp"

namespace setmem {

struct CompareOlsRow {
    std::uint64_t seed = 0;
    std::size_t n = 0;
    EstimateStatus status_sme = EstimateStatus::MaxIter;
    EstimateStatus status_ols = EstimateStatus::MaxIter;
    double err_sme = 0.0;
    double err_ols = 0.0;
    // Certificates of the set-membership solve.
    double max_violation = 0.0;
    double kkt_residual = 0.0;
};

struct CompareOlsResult {
    std::vector<CompareOlsRow> rows;  // seed-major, checkpoints ascending
    std::string csv;
};

struct BanditResult {
    std::vector<PolicyTrace> traces;  // in seed order
    std::string csv;
};

struct EstimateRow {
    std::size_t system = 0;  // 0-based
    std::size_t n = 0;
    std::optional<EstimateResult> result;  // empty group: no estimate
    std::optional<double> error;
};

struct EstimateRunResult {
    std::vector<EstimateRow> rows;
    std::string csv;
    std::string matrices_csv;
};

struct SpectralRunResult {
    std::vector<SpectralReport> reports;
    std::string csv;
};

// Sequential and parallel execution over seeds produce identical output.
struct RunOptions {
    Execution execution = Execution::Parallel;
    bool write_files = true;
};

// Headers of the emitted CSV files.
inline constexpr const char* kCompareOlsHeader = "seed,n,status_sme,status_ols,err_sme,err_ols";
std::string trace_header(std::size_t q);
inline constexpr const char* kEstimateHeader = "p,n_p,status,error_frobenius,objective,max_violation,kkt_residual";

// Single system, no switching; SME and OLS on each checkpoint prefix.
// Writes compare_ols.csv and compare_ols.svg.
CompareOlsResult run_compare_ols(const ExperimentConfig& config, const RunOptions& options = {});

// Greedy bandit per seed. Writes trace.csv plus error.svg, arm.svg and
// state_norm.svg for the first seed.
BanditResult run_bandit(const ExperimentConfig& config, const RunOptions& options = {});

// Writes trajectory.csv for the first seed. Without explicit switches the
// sequence is drawn uniformly at random.
Trajectory run_simulate(const ExperimentConfig& config, const RunOptions& options = {});

// Groups an input trajectory and estimates every subsystem. Writes
// estimate.csv and estimate_matrices.csv.
EstimateRunResult run_estimate(const ExperimentConfig& config, const RunOptions& options = {});

// Writes spectral.csv; one SpectralReport row per configured matrix.
SpectralRunResult run_spectral(const ExperimentConfig& config, const RunOptions& options = {});

std::string trace_csv(const std::vector<PolicyTrace>& traces, std::size_t q);

}  // namespace setmem
