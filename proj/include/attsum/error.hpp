#pragma once

#include <stdexcept>
#include <string>

namespace attsum {

// Bad input data: malformed files, missing cluster parts, shape mismatches
// between artifacts. The CLI maps these to exit status 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IngestError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// A caller broke a documented precondition (shape disagreement, bad index).
// The CLI maps these to exit status 3.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline void require(bool condition, const char* what) {
  if (!condition) throw ContractViolation(what);
}

}  // namespace attsum
