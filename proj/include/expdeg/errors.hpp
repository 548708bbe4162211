#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace expdeg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid arguments or violated preconditions.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Malformed input documents, CSV files or flag values.
class ParseError : public Error {
 public:
  using Error::Error;
};

// An iterative method did not reach its stopping rule.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// A certified cutoff or bound could not be established.
class CutoffValidationError : public Error {
 public:
  using Error::Error;
};

// A result failed its own post-condition check; never emitted silently.
class SoundnessError : public Error {
 public:
  using Error::Error;
};

// Required working precision exceeds the configured ceiling.
class PrecisionOverflow : public Error {
 public:
  PrecisionOverflow(const std::string& what, long required_bits)
      : Error(what), required_bits_(required_bits) {}
  long required_bits() const { return required_bits_; }

 private:
  long required_bits_;
};

// A size (feature count, coefficient count, bit budget) exceeds its ceiling.
class CapacityError : public Error {
 public:
  CapacityError(const std::string& what, std::uint64_t required)
      : Error(what), required_(required) {}
  std::uint64_t required() const { return required_; }

 private:
  std::uint64_t required_;
};

}  // namespace expdeg
