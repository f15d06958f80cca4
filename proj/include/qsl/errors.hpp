#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qsl {

// Base of every error raised by the library. Harness code catches these and
// records them in reports instead of propagating.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition violations: index out of range, lattice mismatch, bad input.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Series or limit estimates that did not settle within their budget.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// A lattice solution left the representable range (|y| > 1e280).
class OverflowError : public Error {
 public:
  using Error::Error;
};

// Root search could not establish a sign-change bracket.
class BracketError : public Error {
 public:
  using Error::Error;
};

// 1 + c_n alpha_{n,0} <= 0 for some n.
class AdmissibilityError : public Error {
 public:
  AdmissibilityError(std::size_t index, const std::string& what)
      : Error(what), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

}  // namespace qsl
