#pragma once

#include <stdexcept>
#include <string>

namespace chernlab {

// Precondition violated by the caller (shape, degree, kind, flag values).
class UsageError : public std::invalid_argument {
 public:
  explicit UsageError(const std::string& what) : std::invalid_argument(what) {}
};

// A field was evaluated outside its chart (plus margin).
class DomainError : public std::out_of_range {
 public:
  explicit DomainError(const std::string& what) : std::out_of_range(what) {}
};

// A requested zero is degenerate: |det J| below threshold.
class DegenerateZeroError : public std::runtime_error {
 public:
  explicit DegenerateZeroError(const std::string& what) : std::runtime_error(what) {}
};

// Feature outside the implemented range (e.g. transgression for rank != 2).
class UnsupportedError : public std::runtime_error {
 public:
  explicit UnsupportedError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace chernlab
