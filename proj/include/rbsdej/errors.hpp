#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rbsdej {

/// Input outside an operation's mathematical domain (e.g. p not in (1,2)).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A sampled coefficient or datum breaks a standing assumption on the problem.
class AssumptionViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Least-squares design matrix is rank deficient or under-determined.
class RegressionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Scalar implicit step could not be solved.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, std::size_t step, std::size_t path)
        : std::runtime_error(what + " (step " + std::to_string(step) + ", path " +
                             std::to_string(path) + ")"),
          step_(step), path_(path) {}

    std::size_t step() const noexcept { return step_; }
    std::size_t path() const noexcept { return path_; }

private:
    std::size_t step_;
    std::size_t path_;
};

/// Invalid experiment configuration; carries the offending `section.key`.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& what)
        : std::runtime_error(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

}  // namespace rbsdej
