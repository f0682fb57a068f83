#pragma once

#include <stdexcept>
#include <string>

namespace singlim {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Coefficient field is not symmetric or not uniformly elliptic.
class EllipticityViolation : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain of a special function.
class DomainError : public Error {
public:
    using Error::Error;
};

class LinearSolveFailure : public Error {
public:
    LinearSolveFailure(const std::string& what, double residual)
        : Error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Raised when a root bracket holds no sign change or a construction
/// step cannot be completed.
class ConstructionFailure : public Error {
public:
    using Error::Error;
};

class UndefinedCertificate : public Error {
public:
    using Error::Error;
};

class CheckInconclusive : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace singlim
