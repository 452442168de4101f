#pragma once

#include <stdexcept>
#include <string>

namespace kantor {

// Malformed input: bad weights, bad cost spec, structural mismatch.
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Argument outside the mathematical domain of an operation (t outside (0,1), p < 1, ...).
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// An operation was called on inputs that violate its stated preconditions
// (non-convex cost handed to the quantile formula, missing doubling constant, ...).
struct PreconditionError : std::logic_error {
    using std::logic_error::logic_error;
};

// A cost function produced a non-finite value where a number was required.
struct EvaluationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A finite result was required but the computation hit the divergence sentinel.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace kantor
