#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <variant>

namespace mcembed {

enum class FailureKind {
  Unreachable,
  Infeasible,
  Insufficient,
  TooLarge,
  DecodeError,
};

const char* to_string(FailureKind kind);

struct Failure {
  FailureKind kind;
  std::string reason;

  // "Infeasible: no admissible NFV node for NF type 3"
  std::string describe() const;
};

// Value-or-failure return used for the expected, non-exceptional outcomes of
// the embedding and graph routines. Contract violations (bad arguments) are
// reported with std::invalid_argument instead.
template <class T>
class Outcome {
 public:
  Outcome(T value) : state_(std::move(value)) {}  // NOLINT
  Outcome(Failure failure) : state_(std::move(failure)) {}  // NOLINT

  bool ok() const { return std::holds_alternative<T>(state_); }
  explicit operator bool() const { return ok(); }

  const T& value() const& {
    if (!ok()) throw std::logic_error("Outcome::value on failure: " + failure().describe());
    return std::get<T>(state_);
  }
  T& value() & {
    if (!ok()) throw std::logic_error("Outcome::value on failure: " + failure().describe());
    return std::get<T>(state_);
  }
  T&& value() && {
    if (!ok()) throw std::logic_error("Outcome::value on failure: " + failure().describe());
    return std::get<T>(std::move(state_));
  }
  const T& operator*() const& { return value(); }
  T& operator*() & { return value(); }
  const T* operator->() const { return &value(); }
  T* operator->() { return &value(); }

  const Failure& failure() const { return std::get<Failure>(state_); }

 private:
  std::variant<T, Failure> state_;
};

inline Failure fail(FailureKind kind, std::string reason) {
  return Failure{kind, std::move(reason)};
}

}  // namespace mcembed
