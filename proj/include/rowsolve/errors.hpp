#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rowsolve {

// Bad arguments or configuration supplied by the caller. CLI exit code 1.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Inputs that are well-formed but numerically unusable (zero matrix,
// nonfinite entries, trivial null space). CLI exit code 2.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed file contents; carries the 1-based line number.
class ParseError : public DataError {
public:
    ParseError(const std::string& what, std::size_t line)
        : DataError(what + " (line " + std::to_string(line) + ")"), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// A request outside the region where a formula is defined.
class UnsupportedCase : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

}  // namespace rowsolve
