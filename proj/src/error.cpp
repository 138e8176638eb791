#include "phbt/error.hpp"

namespace phbt {

const char* category_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::sampling_too_coarse: return "sampling-too-coarse";
    case ErrorCode::duration_too_short: return "duration-too-short";
    case ErrorCode::grid_mismatch: return "grid-mismatch";
    case ErrorCode::shift_exceeds_record: return "shift-exceeds-record";
    case ErrorCode::out_of_range: return "out-of-range";
    case ErrorCode::window_longer_than_record: return "window-longer-than-record";
    case ErrorCode::empty_overlap: return "empty-overlap";
    case ErrorCode::fit_degenerate: return "fit-degenerate";
    case ErrorCode::no_real_root: return "no-real-root";
    case ErrorCode::missing_reference_delay: return "missing-reference-delay";
    case ErrorCode::insufficient_bins: return "insufficient-bins";
    case ErrorCode::config_invalid: return "config-invalid";
    case ErrorCode::unknown_parameter: return "unknown-parameter";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace phbt
