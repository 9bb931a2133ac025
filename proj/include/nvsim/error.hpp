#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace nvsim {

// Bad input: out-of-range parameter, unknown name, malformed file.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// Non-finite numbers or a failed linear-algebra step.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

class NonUniqueSteadyState : public NumericError {
public:
    explicit NonUniqueSteadyState(const std::string& what) : NumericError(what) {}
};

namespace detail {

inline void require(bool ok, const std::string& message)
{
    if (!ok) {
        throw ValidationError(message);
    }
}

inline void require_non_negative(double value, const std::string& field)
{
    if (!(value >= 0.0) || value == std::numeric_limits<double>::infinity()) {
        throw ValidationError(field + " must be finite and >= 0 (got " + std::to_string(value) + ")");
    }
}

} // namespace detail
} // namespace nvsim
