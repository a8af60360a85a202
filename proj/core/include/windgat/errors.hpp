#pragma once

#include <stdexcept>
#include <string>

namespace windgat {

// Base for every error raised by the library. Subclasses map onto the CLI
// exit codes (config → 1, data → 2, numeric → 3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes are incompatible for the requested operation.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A NaN/Inf was produced, or a normalization is degenerate.
class NumericError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace windgat
