#include "samegibbs/error.hpp"

namespace samegibbs {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::cycle_detected: return "CycleDetected";
    case ErrorCode::invalid_index: return "InvalidIndex";
    case ErrorCode::duplicate_edge: return "DuplicateEdge";
    case ErrorCode::cardinality_too_small: return "CardinalityTooSmall";
    case ErrorCode::invalid_config: return "InvalidConfig";
    case ErrorCode::dimension_mismatch: return "DimensionMismatch";
    case ErrorCode::shape_mismatch: return "ShapeMismatch";
    case ErrorCode::degenerate_labels: return "DegenerateLabels";
    case ErrorCode::parse_error: return "ParseError";
    case ErrorCode::io_error: return "IoError";
    case ErrorCode::zero_support: return "ZeroSupport";
    case ErrorCode::empty_data: return "EmptyData";
    case ErrorCode::empty_trace: return "EmptyTrace";
  }
  return "Error";
}

bool is_validation_error(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::io_error:
    case ErrorCode::zero_support:
    case ErrorCode::empty_data:
    case ErrorCode::empty_trace:
      return false;
    default:
      return true;
  }
}

}  // namespace samegibbs
