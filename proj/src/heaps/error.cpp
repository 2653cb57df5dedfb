#include "heaps/error.hpp"

namespace heaps {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "IoError";
    case ErrorCode::Parse: return "ParseError";
    case ErrorCode::UnknownPosTag: return "UnknownPosTag";
    case ErrorCode::EmptyText: return "EmptyText";
    case ErrorCode::Domain: return "DomainError";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::Numerics: return "NumericsError";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::TooLarge: return "TooLarge";
  }
  return "Unknown";
}

void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace heaps
