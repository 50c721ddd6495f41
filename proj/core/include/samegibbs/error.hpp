#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace samegibbs {

enum class ErrorCode {
  // structure and input validation
  cycle_detected,
  invalid_index,
  duplicate_edge,
  cardinality_too_small,
  invalid_config,
  dimension_mismatch,
  shape_mismatch,
  degenerate_labels,
  parse_error,
  // runtime
  io_error,
  zero_support,
  empty_data,
  empty_trace,
};

std::string_view to_string(ErrorCode code) noexcept;

// True for errors caused by malformed or inconsistent input (CLI exit code 2).
bool is_validation_error(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  // The message without the error-name prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace samegibbs
