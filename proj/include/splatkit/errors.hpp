#pragma once

#include <stdexcept>
#include <string>

namespace splatkit {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed or unsupported file content (missing attribute, bad magic, ...).
struct FormatError : Error {
    using Error::Error;
};

/// Data violates an invariant (NaN field, index out of range, non-unit quaternion, ...).
struct ValidationError : Error {
    using Error::Error;
};

/// Filesystem-level failure.
struct IoError : Error {
    using Error::Error;
};

/// Bad configuration (unknown key, out-of-range value).
struct ConfigError : Error {
    using Error::Error;
};

} // namespace splatkit
