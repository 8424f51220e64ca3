#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace susym {

/// Base class for all numerical failures raised by the library.  Schema
/// violations and contract misuse derive from std::logic_error instead so
/// that callers can tell "bad input file" apart from "bad mathematics".
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class ContractViolation : public std::logic_error {
public:
    explicit ContractViolation(const std::string& msg) : std::logic_error(msg) {}
};

/// Evaluation hit a declared or detected singularity of a coefficient.
class SingularPoint : public Error {
public:
    SingularPoint(std::complex<double> where, const std::string& msg)
        : Error(msg), point(where) {}
    std::complex<double> point;
};

/// A Wronskian (or kernel-solve) matrix was numerically singular at a point.
class SingularWronskian : public Error {
public:
    SingularWronskian(std::complex<double> where, double cond, const std::string& msg)
        : Error(msg), point(where), condition(cond) {}
    std::complex<double> point;
    double condition = 0.0;
};

class SingularLeadingCoefficient : public Error {
public:
    using Error::Error;
};

class DegenerateBasis : public Error {
public:
    using Error::Error;
};

class BadChainLengths : public Error {
public:
    using Error::Error;
};

class InvalidChain : public Error {
public:
    using Error::Error;
};

class InvalidJordanSpec : public Error {
public:
    using Error::Error;
};

/// The supplied Jordan data contradicts the operator (division left a
/// nonzero remainder where the criterion promised exactness).
class InconsistentJordanSpec : public Error {
public:
    using Error::Error;
};

class NotRegularlyReducible : public Error {
public:
    using Error::Error;
};

/// Repeated resampling kept hitting poles of intermediate factors.
class PoleCluster : public Error {
public:
    using Error::Error;
};

class FactorizationResidual : public Error {
public:
    using Error::Error;
};

class IntegrationFailure : public Error {
public:
    using Error::Error;
};

class BadScalarData : public Error {
public:
    using Error::Error;
};

class Theorem2ConditionsFail : public Error {
public:
    using Error::Error;
};

/// Scenario file failed schema validation (CLI exit code 2).
class ScenarioError : public std::logic_error {
public:
    explicit ScenarioError(const std::string& msg) : std::logic_error(msg) {}
};

} // namespace susym
