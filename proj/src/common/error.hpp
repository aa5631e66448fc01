// Copyright 2026 The olat Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace olat {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// All points coincide, or some other input that admits no well-defined result.
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss.
class DivergenceError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Malformed file content. `offset()` is the byte position at which parsing failed.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"), detail_(what), offset_(offset) {}

  /// Same error, message prefixed with the file it came from.
  FormatError in_file(const std::string& path) const { return {path + ": " + detail_, offset_}; }

  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::string detail_;
  std::uint64_t offset_;
};

}  // namespace olat
