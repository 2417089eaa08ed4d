#pragma once

#include <stdexcept>
#include <string>

namespace fdmean {

/// Base class for all library errors.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A numeric argument lies outside its mathematical domain
/// (evaluation point outside [0,1], non-finite data value, ...).
struct domain_error : error {
    using error::error;
};

/// A structural option or configuration value is invalid
/// (unsupported order, empty grid, malformed plan, ...).
struct config_error : error {
    using error::error;
};

/// The inputs violate a precondition of the requested operation
/// (too few points for identifiability, wrong design kind, ...).
struct precondition_error : error {
    using error::error;
};

/// A linear-algebra step failed beyond recovery (factorization
/// breakdown after the jitter retry); the message carries diagnostics.
struct numerical_error : error {
    using error::error;
};

/// Failure while reading an external file (CSV rows, plan entries);
/// the message includes the offending line number where known.
struct parse_error : error {
    using error::error;
};

} // namespace fdmean
