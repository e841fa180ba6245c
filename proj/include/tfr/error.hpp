#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tfr {

enum class ErrorCode {
  kFileNotFound,
  kUnsupportedFormat,
  kCorruptData,
  kIo,
  kShapeMismatch,
  kInvalidArgument,
  kEmptyInput,
  kFormat,
  kVersionMismatch,
  kTruncated,
  kConfig,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library; `code()` distinguishes failure kinds.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) throw Error(code, message);
}

}  // namespace tfr
