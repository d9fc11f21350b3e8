#pragma once

#include <stdexcept>
#include <string>

namespace asag {

// Bad input data: malformed files, broken invariants in user-supplied content.
class DataError : public std::runtime_error {
public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure: non-convergence, non-finite values, degenerate geometry.
class NumericError : public std::runtime_error {
public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace asag
