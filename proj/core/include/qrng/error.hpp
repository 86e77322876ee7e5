#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qrng {

// Base class of all library errors. The CLI maps each subclass to a distinct
// process exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A value violates a documented precondition or type invariant.
class ParameterError : public Error {
 public:
  ParameterError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Reading or writing an external resource failed.
class IoError : public Error {
 public:
  using Error::Error;
};

// A file was readable but its contents are malformed. `offset` is the byte
// position at which the problem was detected.
class FormatError : public IoError {
 public:
  FormatError(std::size_t offset, const std::string& message)
      : IoError("byte " + std::to_string(offset) + ": " + message), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

// A well-posed computation has no answer (no 3-dB crossing, block too small).
class ComputationError : public Error {
 public:
  using Error::Error;
};

}  // namespace qrng
