#pragma once

#include <stdexcept>
#include <string>

namespace sigsparse {

/// Raised for contract violations and unrecoverable input problems.
/// Recoverable degeneracies (uniform images, empty pooling regions, ...) are
/// reported through flags on the returned value instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sigsparse
