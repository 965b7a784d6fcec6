#pragma once

#include <stdexcept>
#include <string>

namespace satgrowth {

// Invalid parameter values, out-of-domain arguments, malformed data.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Filesystem failures: missing files, unreadable paths, write errors.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace satgrowth
