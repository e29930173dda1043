#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace holodisc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operand dimensions do not agree.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// A parameter lies outside the domain where the operation is defined.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A matrix that must be inverted is numerically singular.
class SingularityError : public Error {
public:
    SingularityError(const std::string& what, double condition)
        : Error(what), condition_(condition) {}
    double condition() const noexcept { return condition_; }

private:
    double condition_;
};

/// An iteration failed to reach its tolerance. Carries the per-iteration
/// increment norms so callers can report the history.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, std::vector<double> history)
        : Error(what), history_(std::move(history)) {}
    const std::vector<double>& history() const noexcept { return history_; }

private:
    std::vector<double> history_;
};

}  // namespace holodisc
