#pragma once

#include <stdexcept>
#include <string>

namespace mscv {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid user-facing parameter (bad p, unknown test id, M < 2, ...).
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Array shape or grid mismatch between operands.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Numerical failure: NaN/Inf, positivity loss, Newton non-convergence.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// A post-condition that should hold by construction was violated.
class ConsistencyError : public Error {
public:
    using Error::Error;
};

/// Caller broke an interface contract (e.g. unpaired sample ensembles).
class ContractError : public Error {
public:
    using Error::Error;
};

}  // namespace mscv
