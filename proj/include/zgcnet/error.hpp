#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace zgcnet {

/// Input rejected by a precondition (non-finite values, negative counts, bad parameters).
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Array or graph dimensions do not agree.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A complex in the zigzag diagram is not contained in its neighbouring union.
class InclusionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// NaN / Inf detected in a forward pass or training loss.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed text input; carries the 1-based line number.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace zgcnet
