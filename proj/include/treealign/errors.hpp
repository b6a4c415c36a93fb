#pragma once

#include <stdexcept>
#include <string>

namespace treealign {

/// Caller broke a documented precondition (bad dimensions, invalid
/// configuration, mismatched curvatures, ...). Maps to CLI exit code 2.
class ContractViolation : public std::invalid_argument {
public:
    explicit ContractViolation(const std::string& what)
        : std::invalid_argument(what) {}
};

/// A computation left its numeric domain (arcosh argument below 1,
/// cosh overflow, degenerate geometry, singular Hessian, ...).
/// Maps to CLI exit code 3.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what)
        : std::runtime_error(what) {}
};

} // namespace treealign
