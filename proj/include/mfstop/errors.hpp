// SPDX-License-Identifier: MIT
#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mfstop {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parameter record violates a stated invariant (sigma <= 0, beta <= alpha, ...).
class ValidationError : public Error {
public:
    ValidationError(std::string field, const std::string& what)
        : Error(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Argument outside the mathematical domain of a formula.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Fee or target outside the feasible region of the inverse problem.
class FeasibilityError : public Error {
public:
    using Error::Error;
};

/// The initial state already lies in the stopping region of the solved rule.
class InteriorStartViolation : public Error {
public:
    InteriorStartViolation(double x0, double x_star)
        : Error("initial state x0=" + std::to_string(x0) +
                " is not below the solved threshold x*=" + std::to_string(x_star)),
          x0_(x0), x_star_(x_star) {}
    double x0() const noexcept { return x0_; }
    double x_star() const noexcept { return x_star_; }

private:
    double x0_;
    double x_star_;
};

/// Bracket expansion failed to produce a sign change.
class BracketError : public Error {
public:
    using Error::Error;
};

/// The discounted running profit is not integrable for the given coefficients.
class ResolventDivergence : public Error {
public:
    using Error::Error;
};

/// More than one admissible root of the reduced scalar consistency equation.
class MultipleRoots : public Error {
public:
    MultipleRoots(std::vector<std::pair<double, double>> brackets)
        : Error("consistency equation has " + std::to_string(brackets.size()) +
                " admissible roots"),
          brackets_(std::move(brackets)) {}
    const std::vector<std::pair<double, double>>& brackets() const noexcept {
        return brackets_;
    }

private:
    std::vector<std::pair<double, double>> brackets_;
};

/// Objective keeps decreasing up to the search cap.
class UnboundedBelow : public Error {
public:
    explicit UnboundedBelow(double k_max)
        : Error("objective still decreasing at K_max=" + std::to_string(k_max)),
          k_max_(k_max) {}
    double k_max() const noexcept { return k_max_; }

private:
    double k_max_;
};

class DegenerateSample : public Error {
public:
    using Error::Error;
};

/// Simulation configuration rejected (population too small, l1 = 0 at finite N, ...).
class SimulationError : public Error {
public:
    using Error::Error;
};

}  // namespace mfstop
