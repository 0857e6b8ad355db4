#pragma once

#include <stdexcept>
#include <string>

namespace netform {

/// Invalid argument or malformed input (bad dyad, off-grid type, parse failure).
struct InvalidInputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Requested computation exceeds the supported state-space or enumeration budget.
struct InfeasibleSizeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A numerical procedure failed to meet its contract (non-convergence, mass loss).
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed configuration file or flag set.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace netform
