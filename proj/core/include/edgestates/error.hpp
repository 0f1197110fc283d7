#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace edgestates {

enum class ErrorCode {
  InvalidArgument,
  GridTooCoarse,
  GridTooShort,
  NonMonotone,
  BelowBranch,
  OutOfRange,
  EmptyWindow,
  SelfIntersecting,
  NotSmooth,
  OutsideTube,
  OutsideDomain,
  SolverDiverged,
  MaskMismatch,
  WindowTooWide,
  ResolutionTooCoarse,
  NoConvergence,
  MeshFailure,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code);

// Every module error is an Error carrying a machine-readable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, const std::string& what) {
  if (!condition) fail(ErrorCode::InvalidArgument, what);
}

}  // namespace edgestates
