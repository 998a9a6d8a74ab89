#pragma once

#include <stdexcept>
#include <string>

namespace pmdnet {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Node or cell coordinate outside the lattice.
class IndexError : public Error {
 public:
  using Error::Error;
};

/// Vector or matrix extents that do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Input for which a posterior or normalisation is undefined (zero total
/// activity, constant data, singular stationarity system).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration value or unknown key.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// File could not be read, written, or failed integrity checks.
class IoError : public Error {
 public:
  using Error::Error;
};

/// A guard on problem size or numeric health was tripped.
class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace pmdnet
