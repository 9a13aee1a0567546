#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>

#include "vigil/sim/message.hpp"

namespace vigil::sim {

// Fault kinds model the usual defect causes: a crash, an unresponsive window,
// transmission delay, a corrupted output channel, and unbounded learned-state
// growth. Crash takes effect at active_from and persists until an explicit
// restart; the other kinds apply within [active_from, active_until).
struct Crash {};
struct Hang {};
struct Delay {
  VirtualTime extra_latency = 0;
};
struct CorruptOutput {
  std::size_t channel = 0;
  Value replacement = 0.0;
};
struct LeakGrowth {
  std::uint32_t cases_per_tick = 1;
};

using FaultKind = std::variant<Crash, Hang, Delay, CorruptOutput, LeakGrowth>;

struct FaultSpec {
  ComponentId target;
  FaultKind kind;
  VirtualTime active_from = 0;
  VirtualTime active_until = 0;  // exclusive

  bool active_at(VirtualTime t) const {
    return t >= active_from && t < active_until;
  }
};

const char* fault_kind_name(const FaultKind& kind);

}  // namespace vigil::sim
