#ifndef DFD_ERRORS_HPP
#define DFD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace dfd {

/// Argument outside the mathematical domain of an operation (sigma <= 0, ratio <= 1, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Inputs that violate a structural contract: mismatched dimensions, bad configuration.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// File I/O and parse failures. Parse messages carry `path:line:column`.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dfd

#endif  // DFD_ERRORS_HPP
