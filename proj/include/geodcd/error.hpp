#pragma once

#include <stdexcept>
#include <string>

namespace geodcd {

// Bad files, bad configs, invariant violations in user data. CLI exit code 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical or method failures (degenerate SVD, incompatible modality). Exit code 1.
class MethodError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace geodcd
