#pragma once

#include <stdexcept>
#include <string>

namespace affect {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or semantically invalid user configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Bad input data: unreadable files, malformed rows, invalid encodings.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Operand shapes that do not conform for a primitive.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Optimization failed (non-finite loss or gradient).
class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace affect
