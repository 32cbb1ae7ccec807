#pragma once

#include <stdexcept>
#include <string>

namespace depthsr {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad arguments, shapes, configs or files. Maps to CLI exit code 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Non-finite losses, failed gradient checks. Maps to CLI exit code 2.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Checkpoint container could not be decoded.
class CorruptCheckpointError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

namespace detail {
[[noreturn]] inline void fail(const std::string& msg) { throw ValidationError(msg); }
}  // namespace detail

#define DEPTHSR_REQUIRE(cond, msg)                   \
  do {                                               \
    if (!(cond)) ::depthsr::detail::fail(msg);       \
  } while (0)

}  // namespace depthsr
