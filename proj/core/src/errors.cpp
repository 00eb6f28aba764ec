#include "warpflow/errors.hpp"

namespace warpflow {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::boundary_stencil: return "boundary_stencil";
    case ErrorCode::numeric: return "numeric";
    case ErrorCode::singular_state: return "singular_state";
    case ErrorCode::domain: return "domain";
    case ErrorCode::parameter: return "parameter";
    case ErrorCode::class_membership: return "class_membership";
    case ErrorCode::alignment: return "alignment";
    case ErrorCode::feasibility: return "feasibility";
    case ErrorCode::inconclusive: return "inconclusive";
    case ErrorCode::truncation: return "truncation";
    case ErrorCode::config: return "config";
    case ErrorCode::io: return "io";
    case ErrorCode::schema: return "schema";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace warpflow
