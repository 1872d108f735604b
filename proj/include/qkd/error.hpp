#pragma once

#include <stdexcept>
#include <string>

namespace qkd {

/// Input violates a documented precondition (range, grid alignment, shape).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed external input (CSV, JSON config).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Quantity is undefined for the given data, e.g. QBER with zero sifted events.
class UndefinedError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace qkd
