#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dirac {

// Base of every error raised by the library. Subclasses are split by how a
// caller is expected to react: bad input text, a violated precondition, or a
// failed mathematical property.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed expression or document. `position` is a 1-based column into
/// the offending text (0 when not applicable).
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t position = 0)
        : Error(position ? what + " at position " + std::to_string(position) : what),
          position_(position) {}
    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

class UnknownVariable : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

class VariableSetMismatch : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

/// The expression has a pole at the requested point.
class DenominatorVanishes : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

class NotSkewSymmetric : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

class NotLagrangian : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

class TransversalityFailed : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

class DegenerateFrame : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

class SingularPoint : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

class NotAdmissible : public Error {
public:
    using Error::Error;
};

class NotASection : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

class NotASubmersionAtProbe : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

class InvarianceViolated : public Error {
public:
    using Error::Error;
};

class NotClosed : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

class NotPoisson : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

class NotOnConstraint : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

class RankDropInPsi : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

class SecondClassViolated : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

class NotCosymplecticAtPoint : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

class InvalidParametrization : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

class NearSingularConstraintMatrix : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

class StepRejected : public Error {
public:
    using Error::Error;
};

/// Two independent computations of the same quantity disagreed. Raised only
/// when an internal cross-check fails, which indicates a library bug.
class ConsistencyFailure : public Error {
public:
    using Error::Error;
};

}  // namespace dirac
