#pragma once

#include <stdexcept>
#include <string>

namespace isg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dimension mismatches, out-of-domain parameters, malformed vertex sets.
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

// A grid approximation of an epsilon-critical set came back empty.
class EmptySetError : public Error {
 public:
  using Error::Error;
};

// The convex averaged-iterate bound is vacuous (a = 1 and eps * c >= 1).
class BoundUndefinedError : public Error {
 public:
  using Error::Error;
};

// A check's preconditions do not hold on the supplied data.
class InapplicableError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Lookup of a catalog function or verification suite that does not exist.
class UnknownNameError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

}  // namespace isg
