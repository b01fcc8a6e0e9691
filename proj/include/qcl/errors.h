#pragma once

#include <stdexcept>

namespace qcl {

/// Malformed input document (syntax, missing fields, wrong shapes).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Well-formed input that violates a standing hypothesis on the system.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The system's Lie algebra does not reach su(N) or u(N).
class NotControllableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qcl
