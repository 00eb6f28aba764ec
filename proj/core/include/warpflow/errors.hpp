#pragma once

#include <stdexcept>
#include <string>

namespace warpflow {

enum class ErrorCode {
  boundary_stencil,
  numeric,
  singular_state,
  domain,
  parameter,
  class_membership,
  alignment,
  feasibility,
  inconclusive,
  truncation,
  config,
  io,
  schema,
};

const char* to_string(ErrorCode code) noexcept;

// Single exception type for the library; callers switch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

}  // namespace warpflow
