#include "mcembed/outcome.hpp"

namespace mcembed {

const char* to_string(FailureKind kind) {
  switch (kind) {
    case FailureKind::Unreachable: return "Unreachable";
    case FailureKind::Infeasible: return "Infeasible";
    case FailureKind::Insufficient: return "Insufficient";
    case FailureKind::TooLarge: return "TooLarge";
    case FailureKind::DecodeError: return "DecodeError";
  }
  return "Unknown";
}

std::string Failure::describe() const { return std::string(to_string(kind)) + ": " + reason; }

}  // namespace mcembed
