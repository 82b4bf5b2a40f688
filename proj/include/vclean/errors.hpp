#pragma once

#include <stdexcept>
#include <string>

namespace vclean {

// Error taxonomy mirrors the CLI exit codes:
//   UsageError -> 2, DataError (and subclasses) -> 3, NumericError -> 4.

// Bad invocation or malformed configuration written by the user.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid input data: bad shapes, out-of-range parameters, unreadable files.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Tensor/sequence dimensions do not line up.
struct ShapeError : DataError {
    using DataError::DataError;
};

// A stored checksum does not match the payload.
struct ChecksumError : DataError {
    using DataError::DataError;
};

// NaN/Inf escaped a computation, or a numeric gate failed.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace vclean
