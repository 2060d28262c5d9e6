#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace setmem {

// Base of everything the library throws on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class UnsupportedError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Infeasible estimation problems, solver breakdowns and state explosions.
class NumericalError : public Error {
public:
    using Error::Error;
};

class ExplosionError : public NumericalError {
public:
    ExplosionError(std::size_t step, double magnitude)
        : NumericalError("state exploded at t=" + std::to_string(step) +
                         " (|x|_inf=" + std::to_string(magnitude) + ")"),
          step_(step) {}

    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

inline void require_dim(bool ok, const std::string& what) {
    if (!ok) throw DimensionError("dimension mismatch: " + what);
}

}  // namespace setmem
