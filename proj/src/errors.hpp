#pragma once

#include <stdexcept>
#include <string>

namespace pmbm {

/// Linear-algebra degeneracy (singular innovation covariance, collapsed
/// covariance) that makes the requested operation undefined.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// No injective finite-cost assignment exists for a cost matrix.
class InfeasibleError : public std::runtime_error {
public:
    explicit InfeasibleError(const std::string& what, int row = -1)
        : std::runtime_error(what), row_(row) {}
    /// Row that could not be matched, -1 if unknown.
    [[nodiscard]] int row() const noexcept { return row_; }

private:
    int row_;
};

/// Malformed input file. line() is 1-based, -1 if not line-specific.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what, long line = -1)
        : std::runtime_error(what), line_(line) {}
    [[nodiscard]] long line() const noexcept { return line_; }

private:
    long line_;
};

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pmbm
