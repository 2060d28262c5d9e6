#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "setmem/linalg.hpp"
#include "setmem/noise_model.hpp"

namespace setmem {

// |x|_inf above this aborts a simulation with ExplosionError.
inline constexpr double kExplosionThreshold = 1e100;

// Subsystem indices are 0-based in the library API and 1-based in every
// file format and CLI surface.
class SwitchedSystem {
public:
    explicit SwitchedSystem(std::vector<Matrix> matrices);

    std::size_t q() const noexcept { return matrices_.size(); }
    Eigen::Index dim() const noexcept { return dim_; }
    const Matrix& matrix(std::size_t p) const;
    const std::vector<Matrix>& matrices() const noexcept { return matrices_; }

private:
    std::vector<Matrix> matrices_;
    Eigen::Index dim_ = 0;
};

struct Trajectory {
    std::vector<Vector> states;         // X_0 .. X_T
    std::vector<std::size_t> switches;  // alpha_0 .. alpha_{T-1}
    std::vector<Vector> noises;         // w_0 .. w_{T-1} when recorded, else empty

    std::size_t horizon() const noexcept { return switches.size(); }
    Eigen::Index dim() const { return states.empty() ? 0 : states.front().size(); }
};

struct MeasurementPair {
    Vector x;  // X_t
    Vector y;  // X_{t+1}
};

struct MeasurementGroup {
    std::size_t system = 0;
    std::vector<MeasurementPair> pairs;

    std::size_t size() const noexcept { return pairs.size(); }
    // n x d row-stacked regressors and successors.
    Matrix regressors() const;
    Matrix successors() const;
    // First n pairs (time order preserved).
    MeasurementGroup prefix(std::size_t n) const;
};

// A x + w.
Vector step(const Matrix& a, const Vector& x, const Vector& w);

// Runs the switched system from x0 along the given switching sequence, one
// fresh noise draw per transition in switch order.
Trajectory simulate(const SwitchedSystem& sys, const std::vector<std::size_t>& switches,
                    const Vector& x0, NoiseSampler& sampler, bool record_noise = false);

// Splits a trajectory into q per-subsystem groups, pairs in increasing time.
std::vector<MeasurementGroup> group(const Trajectory& traj, std::size_t q);

// Checks length(states) = length(switches) + 1, consistent dimensions and,
// when q is given, switch indices below q. Throws DimensionError.
void validate(const Trajectory& traj, std::optional<std::size_t> q = std::nullopt);

// CSV with header `t,alpha_t,x_1..x_d`; alpha_t is 1-based and empty on the
// final row.
void write_trajectory_csv(const Trajectory& traj, const std::filesystem::path& path);
std::string trajectory_csv(const Trajectory& traj);
Trajectory read_trajectory_csv(const std::filesystem::path& path);
Trajectory parse_trajectory_csv(const std::string& text);

}  // namespace setmem
