#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qfb {

/// Coarse failure classes. The CLI maps these onto process exit codes.
enum class ErrorCategory : int {
  internal = 1,
  invalid_input = 2,
  condition_violation = 3,
  numerical = 4,
  io = 5,
};

inline const char* category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::internal: return "internal";
    case ErrorCategory::invalid_input: return "invalid-input";
    case ErrorCategory::condition_violation: return "condition-violation";
    case ErrorCategory::numerical: return "numerical";
    case ErrorCategory::io: return "io";
  }
  return "internal";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}
  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

struct InvalidDimension : Error {
  explicit InvalidDimension(const std::string& w) : Error(ErrorCategory::invalid_input, w) {}
};

struct DimensionMismatch : Error {
  explicit DimensionMismatch(const std::string& w) : Error(ErrorCategory::invalid_input, w) {}
};

/// Observable diagonal does not follow the lambda_d, lambda_2..lambda_{n-1}, lambda_d layout.
struct PatternError : Error {
  explicit PatternError(const std::string& w) : Error(ErrorCategory::invalid_input, w) {}
};

struct ContractError : Error {
  explicit ContractError(const std::string& w) : Error(ErrorCategory::invalid_input, w) {}
};

struct InvalidState : Error {
  explicit InvalidState(const std::string& w) : Error(ErrorCategory::invalid_input, w) {}
};

struct InvalidDistance : Error {
  explicit InvalidDistance(const std::string& w) : Error(ErrorCategory::invalid_input, w) {}
};

struct NotInitialized : Error {
  explicit NotInitialized(const std::string& w) : Error(ErrorCategory::invalid_input, w) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error(ErrorCategory::invalid_input, w) {}
};

/// A structural condition on the Hamiltonians failed. `condition()` names it;
/// `state()` is the offending state flattened row-major as (re, im) pairs.
class ConditionViolation : public Error {
 public:
  ConditionViolation(std::string condition, const std::string& what,
                     std::vector<double> state = {})
      : Error(ErrorCategory::condition_violation, condition + ": " + what),
        condition_(std::move(condition)),
        state_(std::move(state)) {}
  const std::string& condition() const noexcept { return condition_; }
  const std::vector<double>& state() const noexcept { return state_; }

 private:
  std::string condition_;
  std::vector<double> state_;
};

class NumericalBlowup : public Error {
 public:
  NumericalBlowup(std::size_t step, const std::string& what)
      : Error(ErrorCategory::numerical, what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

struct IntegrationDiverged : Error {
  explicit IntegrationDiverged(const std::string& w) : Error(ErrorCategory::numerical, w) {}
};

class PartialResults : public Error {
 public:
  PartialResults(std::vector<std::uint64_t> failed_seeds, const std::string& what)
      : Error(ErrorCategory::numerical, what), failed_(std::move(failed_seeds)) {}
  const std::vector<std::uint64_t>& failed_seeds() const noexcept { return failed_; }

 private:
  std::vector<std::uint64_t> failed_;
};

struct IoError : Error {
  explicit IoError(const std::string& w) : Error(ErrorCategory::io, w) {}
};

}  // namespace qfb
