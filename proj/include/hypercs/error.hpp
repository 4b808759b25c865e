#pragma once

#include <stdexcept>
#include <string>

namespace hypercs {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed file contents, unsupported element type or interleave.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// The operating system refused a read or write.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Vector or cube sizes disagree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An index or parameter lies outside its admissible range.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Invalid run or solver configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A metric cannot be evaluated for the given inputs.
class MetricError : public Error {
 public:
  using Error::Error;
};

/// A solver produced a non-finite intermediate value.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, long iteration)
      : Error(what + " (iteration " + std::to_string(iteration) + ")"), iteration_(iteration) {}

  long iteration() const noexcept { return iteration_; }

 private:
  long iteration_;
};

}  // namespace hypercs
