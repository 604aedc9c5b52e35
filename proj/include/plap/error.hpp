#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace plap {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad exponent, bad threshold, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// The input is well-formed but the requested quantity is undefined for it
/// (e.g. a Poincare ratio for a function with zero gradient).
class DegenerateInput : public Error {
public:
    using Error::Error;
};

/// Mesh construction or validation failure.
class MeshError : public Error {
public:
    using Error::Error;
};

/// A specific cell failed validation (degenerate or out-of-range indices).
class CellError : public MeshError {
public:
    CellError(std::size_t cell, const std::string& what) : MeshError(what), cell_(cell) {}

    std::size_t cell() const noexcept { return cell_; }

private:
    std::size_t cell_;
};

/// Text parse failure, carrying the 1-based line number it was detected on.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error("line " + std::to_string(line) + ": " + what), line_(line)
    {
    }

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

} // namespace plap
