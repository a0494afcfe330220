#pragma once

#include <stdexcept>
#include <string>

namespace kaf {

/// Base of every error the library throws.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid or missing run configuration key.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Operand shapes do not conform.
class ShapeError : public Error {
public:
  using Error::Error;
};

/// A scalar or structural argument is out of its documented range.
class ParameterError : public Error {
public:
  using Error::Error;
};

/// Caller broke a usage contract (stale cache, mismatched gradient layout).
class ContractError : public Error {
public:
  using Error::Error;
};

/// Dataset content is inconsistent (label range, row counts, input width).
class DataError : public Error {
public:
  using Error::Error;
};

/// A file does not follow its on-disk format.
class FormatError : public Error {
public:
  using Error::Error;
};

/// Reading or writing a file failed.
class IoError : public Error {
public:
  using Error::Error;
};

/// Training loss became NaN or infinite.
class DivergenceError : public Error {
public:
  DivergenceError(const std::string& what, int epoch) : Error(what), epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

private:
  int epoch_;
};

}  // namespace kaf
