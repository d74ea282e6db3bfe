#pragma once

#include <stdexcept>
#include <string>

namespace uavgeo {

// Base of every error raised by the library. The CLI maps IoError to exit
// code 2 and everything else to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of a formula (angles, lengths).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Inputs violate a structural contract (shapes, orthonormality, counts).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

// Rank-deficient point configuration (collinear or coincident points).
class DegenerateConfigurationError : public Error {
 public:
  using Error::Error;
};

// ICP found no correspondence within the distance gate.
class NoCorrespondenceError : public Error {
 public:
  using Error::Error;
};

class OutOfRangeError : public Error {
 public:
  using Error::Error;
};

class UndefinedBaselineError : public Error {
 public:
  using Error::Error;
};

// Prediction set does not cover the sampled views.
class CoverageError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

// Malformed or unsupported on-disk format.
class FormatError : public Error {
 public:
  using Error::Error;
};

class UnsupportedFormatError : public FormatError {
 public:
  using FormatError::FormatError;
};

class TruncatedFileError : public FormatError {
 public:
  using FormatError::FormatError;
};

// Filesystem failures: missing files, unwritable paths.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace uavgeo
