#pragma once

#include <stdexcept>
#include <string>

namespace kaczmarz {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mismatched or invalid dimensions / argument counts.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A row with zero Euclidean norm where a direction is required.
class DegenerateRowError : public Error {
 public:
  using Error::Error;
};

/// A system that admits no meaningful iteration (e.g. all rows zero,
/// rank-deficient where full column rank is required).
class DegenerateSystemError : public Error {
 public:
  using Error::Error;
};

/// A row paving whose constants make a bound undefined (alpha <= 0).
class DegeneratePavingError : public Error {
 public:
  using Error::Error;
};

/// Gram matrix numerically singular; condition number is infinite.
class SingularGramError : public Error {
 public:
  using Error::Error;
};

/// A numerical routine failed to converge or exhausted its iteration cap.
class ComputationError : public Error {
 public:
  using Error::Error;
};

/// File or stream contents not in the expected format.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace kaczmarz
