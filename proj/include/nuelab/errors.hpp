#pragma once

#include <stdexcept>
#include <string>

namespace nuelab {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterate landed exactly on the singular set.
class HitSingularSet : public Error {
 public:
  using Error::Error;
};

/// An iterate left the declared domain (or became non-finite).
class LeftDomain : public Error {
 public:
  using Error::Error;
};

/// Invalid family, parameter, model or experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A numeric procedure could not produce a result (all starts failed,
/// too few uncensored points, reducible matrix, ...).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace nuelab
