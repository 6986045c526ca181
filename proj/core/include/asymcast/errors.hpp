#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace asymcast {

// Coarse error classes. The CLI maps each to a distinct exit code.
enum class ErrorCategory { Config, Data, Numerical, Verification, Io };

const char* category_name(ErrorCategory category) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error(ErrorCategory::Config, message) {}
};

class InvalidInputError : public Error {
 public:
  explicit InvalidInputError(const std::string& message) : Error(ErrorCategory::Data, message) {}
};

/// Raised while reading CSV/schema input. `row` is 1-based and counts the
/// header line, so it matches what an editor shows; 0 means "no specific row".
class IngestionError : public Error {
 public:
  IngestionError(const std::string& message, std::size_t row);

  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& message) : Error(ErrorCategory::Numerical, message) {}
};

class SingularDesignError : public NumericalError {
 public:
  SingularDesignError(const std::string& message, std::vector<std::string> columns)
      : NumericalError(message), columns_(std::move(columns)) {}

  const std::vector<std::string>& columns() const noexcept { return columns_; }

 private:
  std::vector<std::string> columns_;
};

class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& message, double best_objective)
      : NumericalError(message), best_objective_(best_objective) {}

  double best_objective() const noexcept { return best_objective_; }

 private:
  double best_objective_;
};

class TrainingError : public NumericalError {
 public:
  explicit TrainingError(const std::string& message) : NumericalError(message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error(ErrorCategory::Io, message) {}
};

class VerificationError : public Error {
 public:
  explicit VerificationError(const std::string& message)
      : Error(ErrorCategory::Verification, message) {}
};

}  // namespace asymcast
