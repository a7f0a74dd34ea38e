#pragma once

#include <stdexcept>
#include <string>

namespace sdom {

/// Argument outside the mathematical domain of an operation (negative order,
/// beta >= 1, malformed probabilities, ...).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Sizes of two inputs do not agree (weights vs. assets, empty vectors).
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// File could not be read, parsed, or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace sdom
