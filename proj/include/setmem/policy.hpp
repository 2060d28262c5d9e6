#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "setmem/dynamics.hpp"
#include "setmem/estimators.hpp"
#include "setmem/noise_model.hpp"
#include "setmem/random.hpp"

namespace setmem {

// Stream identifiers passed to derive_seed(); process noise and random
// exploration never share a generator.
inline constexpr std::uint64_t kNoiseStream = 1;
inline constexpr std::uint64_t kExplorationStream = 2;
inline constexpr std::uint64_t kSwitchStream = 3;

// The plant: a switched system driven by the caller's arm choices.
class Environment {
public:
    Environment(SwitchedSystem system, NoiseSampler sampler, Vector x0);

    // Applies arm p and returns the pair (X_t, X_{t+1}). Throws ExplosionError.
    MeasurementPair step(std::size_t arm);

    const Vector& state() const noexcept { return state_; }
    std::size_t time() const noexcept { return time_; }
    const SwitchedSystem& system() const noexcept { return system_; }

private:
    SwitchedSystem system_;
    NoiseSampler sampler_;
    Vector state_;
    std::size_t time_ = 0;
};

enum class BanditPhase { InitSweep, Running };

// Greedy choice: the smallest index with radius < 1, or a uniformly random
// arm from `rng` when every radius is >= 1.
std::size_t choose_arm(std::span<const double> radii, RandomStream& rng);

// Per-arm measurement groups, set-membership estimates and their spectral
// radii. Every arm is re-estimated from its full group whenever it receives
// a pair; the other arms are left untouched.
class BanditState {
public:
    BanditState(std::size_t q, NoiseSet noise, std::uint64_t exploration_seed, EstimateOptions options = {});

    using StepObserver = std::function<void(std::size_t arm, double state_norm)>;

    // Plays arms 0..q-1 once each, in order, and enters the Running phase.
    // `observe` (optional) sees each arm after its update together with the
    // norm of the state it was applied to. Returns the arms played.
    std::vector<std::size_t> init_sweep(Environment& env, const StepObserver& observe = {});

    // Requires the Running phase.
    std::size_t choose_arm();

    // Appends the pair to arm p and re-estimates that arm. Throws
    // NumericalError naming the arm if the estimate is infeasible.
    void update(std::size_t arm, MeasurementPair pair);

    std::size_t q() const noexcept { return groups_.size(); }
    BanditPhase phase() const noexcept { return phase_; }
    const std::vector<MeasurementGroup>& groups() const noexcept { return groups_; }
    const std::vector<Matrix>& estimates() const noexcept { return estimates_; }
    const std::vector<double>& radii() const noexcept { return radii_; }
    const std::vector<EstimateStatus>& statuses() const noexcept { return statuses_; }
    std::size_t count(std::size_t arm) const { return groups_.at(arm).size(); }

private:
    NoiseSet noise_;
    EstimateOptions options_;
    RandomStream exploration_;
    BanditPhase phase_ = BanditPhase::InitSweep;
    std::vector<MeasurementGroup> groups_;
    std::vector<Matrix> estimates_;
    std::vector<double> radii_;
    std::vector<EstimateStatus> statuses_;
};

struct PolicyStep {
    std::size_t t = 0;
    std::size_t arm = 0;       // 0-based
    double state_norm = 0.0;   // |X_t|_2, the state the arm was applied to
    std::vector<double> radii; // after this step's update
    std::vector<double> errors;
};

struct PolicyTrace {
    std::uint64_t seed = 0;
    std::vector<PolicyStep> steps;
    // "ok", or "exploded" when the explosion guard truncated the run.
    std::string status = "ok";
};

struct PolicyOptions {
    EstimateOptions estimate{};
    ErrorMetric metric = ErrorMetric::Frobenius;
    Vector x0{};  // defaults to the zero state
};

// Closed-loop run for `horizon` steps (horizon > q), including the initial
// sweep. Deterministic in `seed`.
PolicyTrace run_policy(const SwitchedSystem& system, const NoiseSet& noise, std::size_t horizon, std::uint64_t seed,
                       const PolicyOptions& options = {});

}  // namespace setmem
