#pragma once

#include <stdexcept>
#include <string>

namespace relim {

// Invalid caller-supplied data (bad sizes, out-of-range values, malformed
// files/configs). CLI exit code 1.
struct InputError : std::runtime_error {
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// Requested object exceeds the supported scale (e.g. too many regressors).
// CLI exit code 1.
struct CapacityError : InputError {
    explicit CapacityError(const std::string& msg) : InputError(msg) {}
};

// Iterative solve ended above tolerance. CLI exit code 2.
struct ConvergenceError : std::runtime_error {
    explicit ConvergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

// A "can't happen" condition; indicates a bug. CLI exit code 2.
struct InternalError : std::runtime_error {
    explicit InternalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace relim
