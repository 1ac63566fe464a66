#pragma once

#include <stdexcept>
#include <string>

namespace nbp {

// Invalid argument or precondition violation (CLI exit code 2).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Numerical breakdown: non-finite intermediates, failed factorizations,
// iteration limits (CLI exit code 3).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File/format problems (CLI exit code 4).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nbp
