#pragma once

#include <stdexcept>
#include <string>

namespace tsparse {

enum class ErrorCode {
  invalid_argument,
  length_mismatch,
  repeated_mode,
  non_cubic,
  out_of_regime,
  budget_exceeded,
  // file formats
  io_failure,
  bad_magic,
  unsupported_version,
  bad_header,
  truncated,
  payload_mismatch,
  unsorted_index,
  duplicate_index,
  index_out_of_range,
  non_numeric,
  zero_value,
};

const char* to_string(ErrorCode code) noexcept;

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace tsparse
