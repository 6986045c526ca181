#include "asymcast/errors.hpp"

namespace asymcast {

const char* category_name(ErrorCategory category) noexcept {
  switch (category) {
    case ErrorCategory::Config: return "config error";
    case ErrorCategory::Data: return "data error";
    case ErrorCategory::Numerical: return "numerical failure";
    case ErrorCategory::Verification: return "verification failure";
    case ErrorCategory::Io: return "i/o error";
  }
  return "error";
}

namespace {
std::string with_row(const std::string& message, std::size_t row) {
  return row == 0 ? message : "row " + std::to_string(row) + ": " + message;
}
}  // namespace

IngestionError::IngestionError(const std::string& message, std::size_t row)
    : Error(ErrorCategory::Data, with_row(message, row)), row_(row) {}

}  // namespace asymcast
