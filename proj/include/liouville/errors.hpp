#pragma once

#include <stdexcept>
#include <string>

namespace lv {

/// Process exit status associated with each failure class.
enum class ExitCode : int {
  ok = 0,
  internal = 1,
  usage = 2,
  resource = 3,
  numeric = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& what);
  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

/// Bad input: malformed specs, violated preconditions, model mismatches.
class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what);
};

/// The walk is recurrent by structure (finite, virtually Z or Z^2).
class TransienceError : public UsageError {
 public:
  explicit TransienceError(const std::string& what);
};

/// A size budget was exhausted. `partial` carries the largest radius or
/// power that was completed before the budget ran out.
class ResourceError : public Error {
 public:
  ResourceError(const std::string& what, long partial);
  long partial() const noexcept { return partial_; }

 private:
  long partial_;
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what);
};

class RecurrentWalkError : public NumericError {
 public:
  explicit RecurrentWalkError(const std::string& what);
};

/// A Green value was requested outside the computed domain or before any
/// path reached it.
class TruncationError : public NumericError {
 public:
  explicit TruncationError(const std::string& what);
};

}  // namespace lv
