#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace distdyk {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shapes or structures that cannot be combined (dimension mismatch, empty box, ...).
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// An operation was called outside its documented precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// The function kind does not provide the requested oracle (e.g. a subgradient of an indicator).
class CapabilityError : public Error {
 public:
  using Error::Error;
};

/// Internal state disagrees with itself; signals a broken dual-state invariant.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/// The request is well formed but outside what this implementation supports.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// A file could not be read, written or parsed.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Wraps an error raised while executing inner step (n, w) of a run.
class StepError : public Error {
 public:
  StepError(std::size_t cycle, std::size_t inner, const std::string& what)
      : Error("cycle " + std::to_string(cycle) + ", step " + std::to_string(inner) + ": " + what),
        cycle_(cycle),
        inner_(inner) {}

  std::size_t cycle() const noexcept { return cycle_; }
  std::size_t inner() const noexcept { return inner_; }

 private:
  std::size_t cycle_;
  std::size_t inner_;
};

}  // namespace distdyk
