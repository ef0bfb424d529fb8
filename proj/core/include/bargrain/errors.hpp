#pragma once

#include <stdexcept>
#include <string>

namespace bargrain {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Operand shapes are incompatible for the requested operation.
class DimensionError : public Error {
public:
    using Error::Error;
};

// A value violates a documented precondition (range, label, finiteness).
class ValidationError : public Error {
public:
    using Error::Error;
};

// API misuse that is neither a shape nor a value problem.
class ContractError : public Error {
public:
    using Error::Error;
};

// Malformed dataset directory, checkpoint or config file.
class LoadError : public Error {
public:
    using Error::Error;
};

// Training produced a non-finite loss.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, int epoch) : Error(what), epoch_(epoch) {}
    int epoch() const noexcept { return epoch_; }

private:
    int epoch_;
};

}  // namespace bargrain
