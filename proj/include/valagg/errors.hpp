#pragma once

#include <stdexcept>

namespace valagg {

/// Unparseable or inconsistent configuration (exit code 2).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Filesystem failures: unwritable output, unreadable input (exit code 3).
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace valagg
