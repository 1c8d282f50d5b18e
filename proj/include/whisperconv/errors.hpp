// Copyright 2026 The whisperconv Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <stdexcept>
#include <string>

namespace whisperconv {

// Base class for every error raised on bad input or configuration. The CLI
// maps these to exit code 1; anything else escaping is an internal error.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DecodeError : public Error {
 public:
  using Error::Error;
};

class UnsupportedFormatError : public Error {
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

class DimensionError : public Error {
 public:
  using Error::Error;
};

class EmptyInputError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public TrainingError {
 public:
  using TrainingError::TrainingError;
};

class ManifestError : public Error {
 public:
  using Error::Error;
};

class SelectionError : public Error {
 public:
  using Error::Error;
};

class ModelError : public Error {
 public:
  using Error::Error;
};

}  // namespace whisperconv
