#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace eelm {

// Invalid argument, config field, or geometry mismatch.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A time integrator or surrogate produced a non-finite / out-of-range state.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, std::size_t step)
        : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_(step) {}

    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

// The readout system could not be factorized (singular moment matrix).
class SolveError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace eelm
