#pragma once

#include <stdexcept>
#include <string>

namespace capgame {

/// Invalid model or configuration input.
struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed to deliver a trustworthy result
/// (no bracket, ODE singularity, quadrature non-convergence, ...).
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace capgame
