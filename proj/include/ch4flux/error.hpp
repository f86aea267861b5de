#pragma once

#include <stdexcept>
#include <string>

namespace ch4flux {

// Input or contract violations: malformed files, out-of-range parameters,
// unit mismatches. Mapped to CLI exit code 2.
class ContractError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Numerical failures such as a background covariance that cannot be
// factorized or a target with too few informative bands. Exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnknownSensorError : public ContractError {
public:
    explicit UnknownSensorError(const std::string& name)
        : ContractError("unknown sensor: " + name) {}
};

class RangeError : public ContractError {
public:
    RangeError(std::string axis, const std::string& what)
        : ContractError(what), axis_(std::move(axis)) {}
    const std::string& axis() const noexcept { return axis_; }

private:
    std::string axis_;
};

class CoverageError : public ContractError {
public:
    using ContractError::ContractError;
};

class UnitMismatchError : public ContractError {
public:
    using ContractError::ContractError;
};

class EmptyMaskError : public ContractError {
public:
    using ContractError::ContractError;
};

class MissingCoefficientsError : public ContractError {
public:
    using ContractError::ContractError;
};

class InvalidGeometryError : public ContractError {
public:
    using ContractError::ContractError;
};

class DegenerateBackgroundError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DegenerateTargetError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace ch4flux
