// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace idn {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor shapes or channel counts do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// An IdnConfig (or run configuration) violates one of its invariants.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An object was used out of order, e.g. backward before forward.
class StateError : public Error {
 public:
  using Error::Error;
};

/// Bad arguments supplied by a caller (unknown mode, zero size, ...).
class UsageError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace idn
