#pragma once

#include <stdexcept>
#include <string>

namespace trwopt {

/// File or stream level failure (missing file, malformed header, truncation).
struct io_error : std::runtime_error {
    explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Optimization produced a non-finite objective value.
struct numerical_error : std::runtime_error {
    explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace trwopt
