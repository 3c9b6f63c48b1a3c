#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace unobs {

/// Argument outside the documented domain of a function (e.g. |r| >= 50 for J_k).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Matrix or vector dimensions do not agree.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A matrix required to be Hurwitz has an eigenvalue with real part >= -1e-12.
class NotHurwitzError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The Kalman controllability matrix of (A, b) is rank deficient.
class UncontrollableError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// |t| * ||M|| exceeds the range where the matrix exponential is attempted.
class OverflowError : public std::overflow_error {
public:
    using std::overflow_error::overflow_error;
};

/// A bounded search (bisection on parameters) ran out of iterations.
class SearchFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Configuration validation failure; carries every problem found, not only the first.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> problems)
        : std::runtime_error(join(problems)), problems_(std::move(problems)) {}

    const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    static std::string join(const std::vector<std::string>& items) {
        std::string out;
        for (const auto& item : items) {
            if (!out.empty()) out += "; ";
            out += item;
        }
        return out;
    }

    std::vector<std::string> problems_;
};

}  // namespace unobs
