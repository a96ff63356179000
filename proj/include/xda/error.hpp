#pragma once

#include <stdexcept>
#include <string>

namespace xda {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Shape or extent mismatch between tensors.
struct DimensionError : Error {
    using Error::Error;
};

// A precondition of an operation was violated (non-scalar loss, bad axis, ...).
struct ContractError : Error {
    using Error::Error;
};

// Invalid data content (label out of range, malformed file payload, ...).
struct DataError : Error {
    using Error::Error;
};

// Filesystem / stream failure; message carries the path.
struct IoError : Error {
    using Error::Error;
};

// Invalid configuration key or value.
struct ConfigError : Error {
    using Error::Error;
};

// Non-finite value where a finite one is required (diverged training, ...).
struct NumericError : Error {
    using Error::Error;
};

}  // namespace xda
