#ifndef CTQW_ERRORS_HPP
#define CTQW_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ctqw {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad input: a precondition on a site, grid or parameter was violated.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

class DefectOutOfGrid : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class SiteOutOfGrid : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class GridTooSmall : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class GridMismatch : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class InsufficientSamples : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class MismatchedSeries : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

/// Numerical failure of a run (maps to CLI exit code 3).
class NumericFailure : public Error {
public:
    using Error::Error;
};

class ConvergenceFailure : public NumericFailure {
public:
    using NumericFailure::NumericFailure;
};

class LatticeTooSmall : public NumericFailure {
public:
    using NumericFailure::NumericFailure;
};

class NegativeVariance : public NumericFailure {
public:
    using NumericFailure::NumericFailure;
};

/// Command-line / configuration problems (exit code 2).
class UsageError : public Error {
public:
    using Error::Error;
};

class ConflictError : public UsageError {
public:
    using UsageError::UsageError;
};

class IoError : public Error {
public:
    using Error::Error;
};

class EmptyResult : public Error {
public:
    using Error::Error;
};

}  // namespace ctqw

#endif  // CTQW_ERRORS_HPP
