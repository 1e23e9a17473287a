// errors.hpp: Exception types; the CLI maps them onto exit codes

#pragma once

#include <stdexcept>
#include <string>

namespace dqed {

// Bad configuration or bad arguments at the API boundary (exit code 2).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// An iteration ran out of budget: Jacobi sweeps, steady state, Fock truncation (exit code 3).
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A physical invariant broke: positivity, trace, impossible rates (exit code 4).
class PhysicsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input matrix failed the Hermiticity precondition.
class NotHermitianError : public std::invalid_argument {
public:
    NotHermitianError(const std::string& where, double max_asymmetry)
        : std::invalid_argument(where + ": matrix not Hermitian, max asymmetry " +
                                std::to_string(max_asymmetry)),
          max_asymmetry_(max_asymmetry) {}
    double max_asymmetry() const noexcept { return max_asymmetry_; }

private:
    double max_asymmetry_;
};

// A density-matrix eigenvalue was more negative than the policy allows.
class PositivityError : public PhysicsError {
public:
    PositivityError(const std::string& where, double min_eigenvalue)
        : PhysicsError(where + ": positivity violated, min eigenvalue " +
                       std::to_string(min_eigenvalue)),
          min_eigenvalue_(min_eigenvalue) {}
    double min_eigenvalue() const noexcept { return min_eigenvalue_; }

private:
    double min_eigenvalue_;
};

} // namespace dqed
