#pragma once

#include <cstdint>
#include <optional>

#include "setmem/linalg.hpp"
#include "setmem/random.hpp"

namespace setmem {

inline constexpr double kDefaultMembershipTol = 1e-9;

// Known compact convex support of the process noise. Either an axis-aligned
// box [lower, upper] or a bounded polytope {u : H u <= h}. Immutable.
class NoiseSet {
public:
    enum class Kind { Box, Polytope };

    // Requires lower[j] < upper[j] and lower[j] <= 0 <= upper[j].
    static NoiseSet box(Vector lower, Vector upper);
    // Symmetric box [-half_width, half_width]^d.
    static NoiseSet cube(Eigen::Index d, double half_width = 1.0);
    // The single point {0}; only meaningful for noise-free simulation and
    // exact-data estimation.
    static NoiseSet zero(Eigen::Index d);
    // Throws DimensionError if the polytope is unbounded.
    static NoiseSet polytope(Matrix h_matrix, Vector h_vector);

    Kind kind() const noexcept { return kind_; }
    Eigen::Index dim() const noexcept { return dim_; }
    bool is_box() const noexcept { return kind_ == Kind::Box; }

    // Box accessors; throw UnsupportedError on a polytope.
    const Vector& lower() const;
    const Vector& upper() const;
    // Polytope accessors; throw UnsupportedError on a box.
    const Matrix& halfspace_normals() const;
    const Vector& halfspace_offsets() const;

    friend bool operator==(const NoiseSet& a, const NoiseSet& b);

private:
    NoiseSet() = default;

    Kind kind_ = Kind::Box;
    Eigen::Index dim_ = 0;
    Vector lower_, upper_;
    Matrix h_;
    Vector offsets_;
};

// True iff every defining inequality holds up to tol.
bool contains(const NoiseSet& set, const Vector& u, double tol = kDefaultMembershipTol);

// Euclidean projection onto the set (unique by convexity).
Vector project(const NoiseSet& set, const Vector& u);

// Euclidean distance from u to the set.
double distance(const NoiseSet& set, const Vector& u);

// Seeded i.i.d. uniform draws on a box. Single owner; give each thread its
// own sampler.
class NoiseSampler {
public:
    NoiseSampler(NoiseSet set, std::uint64_t seed);

    // Throws UnsupportedError for a polytope set.
    Vector sample();

    const NoiseSet& set() const noexcept { return set_; }
    std::uint64_t seed() const noexcept { return seed_; }

private:
    NoiseSet set_;
    std::uint64_t seed_;
    RandomStream stream_;
};

}  // namespace setmem
