#pragma once

#include <stdexcept>
#include <string>

namespace ptx {

/// Invalid construction parameters (bad grid, bad ensemble config, ...).
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Structurally valid object queried outside its domain (off-grid time, dimension mismatch, ...).
struct QueryError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Requested derivative order or mode not supported by the object.
struct CapabilityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Two routes that must agree disagreed beyond tolerance.
struct ConsistencyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace ptx
