#pragma once

#include <stdexcept>
#include <string>

namespace mcle {

// Bad arguments, malformed files, violated preconditions.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A computation that could not produce a finite or converged result.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace mcle
