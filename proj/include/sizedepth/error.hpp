#pragma once

#include <stdexcept>
#include <string>

namespace sizedepth {

enum class ErrorCode {
  invalid_argument,
  invalid_camera,
  behind_camera,
  index_out_of_range,
  missing_plane,
  missing_translation,
  insufficient_data,
  low_consensus,
  non_finite,
  placement_failure,
  mismatch,
  schema,
  io,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sizedepth
