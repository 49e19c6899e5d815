#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace jnrf {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor shapes that cannot be combined.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// FFT buffer length that is not a power of two.
class LengthError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration value or key.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input data.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A BRAT line that does not follow the standoff grammar.
class ParseError : public DataError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Two gold entities claim the same token.
class AlignmentError : public DataError {
 public:
  using DataError::DataError;
};

/// Synthetic corpus constraints that cannot be met.
class GenerationError : public DataError {
 public:
  using DataError::DataError;
};

/// Checkpoint container is truncated, mismatched or of another version.
class CheckpointError : public Error {
 public:
  using Error::Error;
};

/// NaN or infinite value where a finite one is required.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace jnrf
