#pragma once

#include <stdexcept>
#include <string>

namespace kscube {

/// Requested enumeration, table, or LP exceeds a configured cap.
class SizeLimitError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Argument outside the documented domain (odd n where even is required,
/// exponent out of range, index out of bounds, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Operands built for different side lengths or value dimensions.
class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical hypothesis failed (negative Gram spectrum, simplex breakdown).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed serialized input.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {
inline void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}
}  // namespace detail

}  // namespace kscube
