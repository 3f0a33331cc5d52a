#pragma once

#include <stdexcept>
#include <string>

namespace maass {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (y <= 0, composite level, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Evaluation at a pole of Gamma or of the G factor.
class PoleError : public Error {
public:
    using Error::Error;
};

/// A documented precondition was violated by the caller.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Adaptive quadrature or an iterative scheme failed to reach its tolerance.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// Fundamental-domain reduction did not stabilise.
class IterationLimitError : public Error {
public:
    using Error::Error;
};

/// 64-bit integer overflow while composing group elements.
class OverflowError : public Error {
public:
    using Error::Error;
};

/// Collocation point that did not move under the pullback.
class DegenerateSystemError : public Error {
public:
    using Error::Error;
};

/// A residual dip vanished while it was being refined.
class LostMinimumError : public Error {
public:
    using Error::Error;
};

/// L-function evaluation requested outside the supported strip.
class WindowError : public Error {
public:
    using Error::Error;
};

/// Not enough Fourier coefficients to reach the requested accuracy.
class PrecisionError : public Error {
public:
    using Error::Error;
};

/// Too little data for a statistic.
class InsufficientDataError : public Error {
public:
    using Error::Error;
};

/// An oldform with no newform on one side of it.
class BoundaryError : public Error {
public:
    using Error::Error;
};

class NotFoundError : public Error {
public:
    using Error::Error;
};

}  // namespace maass
