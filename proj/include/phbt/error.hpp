#pragma once

#include <stdexcept>
#include <string>

namespace phbt {

// Error categories. The string forms returned by category_name() are part of
// the CLI contract and are printed verbatim on failure.
enum class ErrorCode {
  invalid_argument,
  sampling_too_coarse,
  duration_too_short,
  grid_mismatch,
  shift_exceeds_record,
  out_of_range,
  window_longer_than_record,
  empty_overlap,
  fit_degenerate,
  no_real_root,
  missing_reference_delay,
  insufficient_bins,
  config_invalid,
  unknown_parameter,
  io,
};

const char* category_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  const char* category() const noexcept { return category_name(code_); }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

inline void require(bool condition, ErrorCode code, const char* what) {
  if (!condition) fail(code, what);
}

}  // namespace phbt
