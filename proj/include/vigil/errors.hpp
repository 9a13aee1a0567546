#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace vigil {

enum class Err {
  PastEvent,
  UnknownReceiver,
  UnknownTarget,
  NotRunning,
  TypeMismatch,
  RestartBudgetExhausted,
  DuplicateMember,
  UnknownProbeId,
  ArityMismatch,
  NoStandby,
  BothFailed,
  UnorderedHistory,
  InsufficientBudget,
  CorruptLog,
  SchemaViolation,
};

class SimError : public std::runtime_error {
 public:
  SimError(Err code, std::string what)
      : std::runtime_error(std::move(what)), code_(code) {}
  Err code() const { return code_; }

 private:
  Err code_;
};

[[noreturn]] inline void raise(Err code, const std::string& what) {
  throw SimError(code, what);
}

}  // namespace vigil
