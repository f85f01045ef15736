#pragma once

#include <stdexcept>
#include <string>

namespace satprs {

/// Base class for all library errors. The category drives CLI exit codes.
class Error : public std::runtime_error {
public:
    enum class Category { Shape, Precondition, Certificate, Synthesis, NotApplicable, Config };

    Error(Category category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    [[nodiscard]] Category category() const noexcept { return category_; }

private:
    Category category_;
};

/// Operand dimensions do not agree.
class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& what) : Error(Category::Shape, what) {}
};

/// An argument violates a documented precondition (bounds, rates, violation level).
class PreconditionError : public Error {
public:
    explicit PreconditionError(const std::string& what) : Error(Category::Precondition, what) {}
};

/// A matrix that must be symmetric positive definite is not.
class CertificateError : public Error {
public:
    explicit CertificateError(const std::string& what) : Error(Category::Certificate, what) {}
};

/// No common quadratic certificate was found below rate one.
class SynthesisError : public Error {
public:
    SynthesisError(const std::string& what, double last_infeasible_lambda)
        : Error(Category::Synthesis, what), last_infeasible_lambda_(last_infeasible_lambda) {}

    [[nodiscard]] double last_infeasible_lambda() const noexcept { return last_infeasible_lambda_; }

private:
    double last_infeasible_lambda_;
};

/// The tightened rate cannot be computed because the region-of-linearity
/// condition does not hold; callers fall back to the global rate.
class NotApplicableError : public Error {
public:
    explicit NotApplicableError(const std::string& what) : Error(Category::NotApplicable, what) {}
};

/// Malformed configuration document.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(Category::Config, what) {}
};

}  // namespace satprs
