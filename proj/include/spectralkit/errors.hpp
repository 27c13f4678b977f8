#pragma once

#include <stdexcept>
#include <string>

namespace spectralkit {

/// Base class for all spectralkit errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Bad or inconsistent configuration (params, grid shapes, stopping rules).
struct ConfigError : Error {
    using Error::Error;
};

/// Unknown parameter path or wrong value type for a leaf.
struct ParamError : ConfigError {
    using ConfigError::ConfigError;
};

/// Malformed text input; carries 1-based line/column of the offending token.
struct ParseError : Error {
    int line = 0;
    int column = 0;
    ParseError(const std::string& msg, int line_, int col_)
        : Error(msg + " (line " + std::to_string(line_) + ", column " +
                std::to_string(col_) + ")"),
          line(line_), column(col_) {}
};

/// Array extents do not match what an operation expects.
struct ShapeError : Error {
    using Error::Error;
};

/// Lookup of an unregistered solver or component id.
struct RegistryError : Error {
    using Error::Error;
};

/// Non-finite value detected in the state during time stepping.
struct DivergenceError : Error {
    long iteration = 0;
    std::string field;
    DivergenceError(long it, const std::string& field_name)
        : Error("non-finite value in field '" + field_name + "' at iteration " +
                std::to_string(it)),
          iteration(it), field(field_name) {}
};

/// File I/O problems: missing streams, truncated payloads, digest mismatch.
struct IoError : Error {
    using Error::Error;
};

}  // namespace spectralkit
