#pragma once

#include <stdexcept>
#include <string>

namespace augclust {

/// Base class for every error thrown by this library. The CLI maps the
/// subclasses onto process exit codes (data errors -> 2, numeric -> 3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor/image shape contract violated (e.g. matmul inner dims disagree).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Invalid static configuration (bad hyperparameter, empty candidate list).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Invalid runtime data (bad manifest, out-of-range target, empty dataset).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Call-sequencing violation (e.g. backward without a matching forward).
class StateError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values where finite ones are required (divergence).
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Filesystem or codec failure.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace augclust
