#pragma once

#include <stdexcept>
#include <string>

namespace memfuse {

// Malformed input data, files or configuration. The CLI maps this to exit code 2.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A numerical routine could not produce a result (e.g. optimizer failure).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace memfuse
