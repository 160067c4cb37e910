#pragma once

#include <stdexcept>
#include <string>

namespace fosr {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A covariate row has zero sample variance and cannot be standardized.
struct ConstantCovariate : Error {
    explicit ConstantCovariate(std::size_t covariate)
        : Error("covariate " + std::to_string(covariate + 1) +
                " has zero sample standard deviation"),
          index(covariate) {}
    std::size_t index;
};

/// Curves do not share a common evaluation grid where one is required.
struct GridMismatch : Error {
    using Error::Error;
};

struct InsufficientBasisCount : Error {
    using Error::Error;
};

/// An evaluation point falls outside the basis domain.
struct DomainViolation : Error {
    using Error::Error;
};

/// A nonfinite value was passed where a finite one is required.
struct NumericalInput : Error {
    using Error::Error;
};

/// A full conditional collapsed to an improper distribution.
struct DegenerateConditional : Error {
    using Error::Error;
};

/// Cholesky factorisation of the precision matrix failed even after jitter.
struct IllConditionedPrecision : Error {
    IllConditionedPrecision(const std::string& msg, double pivot)
        : Error(msg), smallest_pivot(pivot) {}
    double smallest_pivot;
};

/// Chains have zero within-chain variance but disagree between chains.
struct StuckChains : Error {
    using Error::Error;
};

struct NullVariation : Error {
    using Error::Error;
};

struct DegreesOfFreedom : Error {
    using Error::Error;
};

struct SaturatedFit : Error {
    using Error::Error;
};

struct ParseError : Error {
    ParseError(const std::string& file, std::size_t row, const std::string& what)
        : Error(file + ":" + std::to_string(row) + ": " + what),
          line(row) {}
    std::size_t line;
};

}  // namespace fosr
