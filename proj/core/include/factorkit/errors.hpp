#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace factorkit {

/// Base class for every error raised by the library. `kind()` is a stable
/// machine-readable tag used by the CLI error envelope.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept { return "error"; }
};

/// Operand shapes are incompatible (matmul, permutation length, block grid).
class ShapeError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "shape"; }
};

/// An argument is outside its admissible range (rank, block count, budget).
class ArgumentError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "argument"; }
};

/// Malformed array file or manifest. Carries the byte offset where decoding failed.
class FormatError : public Error {
public:
    FormatError(const std::string& what, std::size_t offset)
        : Error(what + " (at byte " + std::to_string(offset) + ")"), detail_(what), offset_(offset) {}
    const char* kind() const noexcept override { return "format"; }
    std::size_t offset() const noexcept { return offset_; }
    /// Message without the offset suffix.
    const std::string& detail() const noexcept { return detail_; }

private:
    std::string detail_;
    std::size_t offset_;
};

/// An iterative numerical routine failed (SVD non-convergence, non-finite values).
class NumericalError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "numerical"; }
};

/// A parameter budget cannot be met by any admissible rank.
class InfeasibleError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "infeasible"; }
};

class IoError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "io"; }
};

}  // namespace factorkit
