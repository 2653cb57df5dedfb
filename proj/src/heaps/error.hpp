#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace heaps {

enum class ErrorCode {
  InvalidArgument,
  Io,
  Parse,
  UnknownPosTag,
  EmptyText,
  Domain,
  DegenerateInput,
  Numerics,
  GridMismatch,
  TooLarge,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the core carries one of the codes above; the C API
// maps them one-to-one onto heaps_status values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace heaps
