#pragma once

#include <stdexcept>
#include <string>

namespace causalreg {

// Error categories map onto process exit codes in the CLI:
// ConfigError -> 2, DataError -> 3, NumericError -> 4.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class InvalidInput final : public DataError {
 public:
  using DataError::DataError;
};

class NotPositiveSemidefinite final : public NumericError {
 public:
  using NumericError::NumericError;
};

class SingularSystem final : public NumericError {
 public:
  using NumericError::NumericError;
};

class SingularStructure final : public NumericError {
 public:
  using NumericError::NumericError;
};

class InvalidGrid final : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class TooFewObservations final : public DataError {
 public:
  using DataError::DataError;
};

class TooManyFolds final : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class DegenerateResample final : public DataError {
 public:
  using DataError::DataError;
};

class EmptyTable final : public DataError {
 public:
  using DataError::DataError;
};

class MissingColumn final : public DataError {
 public:
  using DataError::DataError;
};

class NonNumericCell final : public DataError {
 public:
  NonNumericCell(std::size_t row, std::size_t col, const std::string& what)
      : DataError(what), row(row), col(col) {}
  std::size_t row;
  std::size_t col;
};

class UnknownLabel final : public DataError {
 public:
  using DataError::DataError;
};

class EmptyEnvironment final : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace causalreg
