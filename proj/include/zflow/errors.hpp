#pragma once

#include <stdexcept>
#include <string>

namespace zflow {

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Argument outside the admissible region (flow radius, unit disk, Im sigma > 0, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A magnitude left the representable range; never silently returns inf.
class OverflowError : public Error {
 public:
  using Error::Error;
};

// 1 + quad*tau passed through zero: the closed-form flow degenerates.
class SingularFlowError : public Error {
 public:
  using Error::Error;
};

class NonSimpleZeroError : public Error {
 public:
  using Error::Error;
};

// Two zeros closer than the working tolerance where distinctness is required.
class CollisionError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

}  // namespace zflow
