#pragma once

#include <stdexcept>
#include <string>

namespace vad {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad parameters or an inconsistent configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input data that is missing, malformed, or insufficient.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A numerical failure (non-finite values, singular systems).
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Frame-directory loading failures, each kind reported distinctly.
class LoadError : public DataError {
 public:
  enum class Kind { MissingDirectory, NoMatchingFiles, DimensionMismatch, Decode };

  LoadError(Kind kind, const std::string& what) : DataError(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

}  // namespace vad
