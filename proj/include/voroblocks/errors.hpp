#pragma once

#include <array>
#include <stdexcept>
#include <string>

namespace voroblocks {

/// Base class for everything this library throws.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// No data rows where at least one was required.
struct EmptyInputError : Error {
    using Error::Error;
};

/// Two input points with identical coordinates; the tessellation is undefined.
struct DuplicatePointsError : Error {
    using Error::Error;
};

/// Argument outside the domain of the posterior (V <= N - 1) or of an operation.
struct DomainError : Error {
    using Error::Error;
};

/// A cell ended up below one quantum of volume; carries the largest quantum that would pass.
struct QuantizationError : Error {
    std::array<double, 2> suggested_quantum{0.0, 0.0};
    QuantizationError(const std::string& msg, std::array<double, 2> suggestion)
        : Error(msg), suggested_quantum(suggestion) {}
};

/// Merge of blocks that are dead or not adjacent.
struct InvalidMergeError : Error {
    using Error::Error;
};

/// Instance too large for exhaustive enumeration.
struct TooLargeError : Error {
    using Error::Error;
};

/// Query point outside the observation bounds.
struct OutOfBoundsError : Error {
    using Error::Error;
};

/// Malformed synthetic-data spec or degenerate geometry description.
struct InvalidSpecError : Error {
    using Error::Error;
};

/// Input file could not be parsed; message carries file and line number.
struct ParseError : Error {
    using Error::Error;
};

/// Bad configuration value or unknown configuration key.
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace voroblocks
