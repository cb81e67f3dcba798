#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace horizon {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Reading or writing a file failed at the OS level.
class IoError : public Error {
 public:
  using Error::Error;
};

// File contents do not follow the expected layout (wrong magic, bad JSON).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Declared table sizes disagree with the data that is present.
class SizeError : public Error {
 public:
  using Error::Error;
};

// An argument violates an operation's documented precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// A name (environment, method, policy kind) does not resolve.
class LookupError : public Error {
 public:
  using Error::Error;
};

// A configured state or sequence cap would be exceeded.
class CapExceeded : public Error {
 public:
  CapExceeded(const std::string& what, std::size_t observed)
      : Error(what), observed_(observed) {}
  std::size_t observed() const noexcept { return observed_; }

 private:
  std::size_t observed_;
};

// A simulator returned different results for the same (state, action).
class NondeterminismError : public Error {
 public:
  using Error::Error;
};

}  // namespace horizon
