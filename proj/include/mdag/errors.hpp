#ifndef MDAG_ERRORS_HPP
#define MDAG_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mdag {

/// Malformed or inconsistent user input (bad vertex index, dimension mismatch, ...).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A file could not be parsed. The message carries path/line context.
class ParseError : public InputError {
public:
    using InputError::InputError;
};

/// A request exceeds a hard size budget (enumeration, brute force).
class CapacityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Degenerate numerics, e.g. a non-positive predictive variance in the filter.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Broken internal invariant (e.g. an encoding that turned out infeasible).
class InternalError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace mdag

#endif  // MDAG_ERRORS_HPP
