#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sfhreg {

// Broken precondition on shapes, symmetry, ranges and the like.
class ContractViolation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class SingularMatrix : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Argument outside a function's mathematical domain (logit at 0 or 1).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class DivergenceError : public std::runtime_error {
public:
    DivergenceError(std::size_t iteration, const std::string& what)
        : std::runtime_error("diverged at iteration " + std::to_string(iteration) + ": " + what),
          iteration_(iteration) {}

    std::size_t iteration() const noexcept { return iteration_; }

private:
    std::size_t iteration_;
};

// CSV / JSON input problems. Row and column are 1-based; 0 means "not applicable".
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t row = 0, std::size_t column = 0)
        : std::runtime_error(format(what, row, column)), row_(row), column_(column) {}

    std::size_t row() const noexcept { return row_; }
    std::size_t column() const noexcept { return column_; }

private:
    static std::string format(const std::string& what, std::size_t row, std::size_t column) {
        std::string msg = what;
        if (row != 0) msg += " (row " + std::to_string(row);
        if (row != 0 && column != 0) msg += ", column " + std::to_string(column);
        if (row != 0) msg += ")";
        return msg;
    }

    std::size_t row_;
    std::size_t column_;
};

class ScaleMismatch : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class LevelExhausted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace sfhreg
