#pragma once

#include <cstdint>
#include <string>

#include "vigil/values.hpp"

namespace vigil::sim {

// Virtual time in integer milliseconds of simulated time. Starts at 0 and is
// monotonically non-decreasing within a run.
using VirtualTime = std::uint64_t;

using ComponentId = std::string;

enum class MessageKind { Input, Output, Ping, Pong, Probe, ProbeResponse, Control };

const char* kind_name(MessageKind k);

inline bool is_test_kind(MessageKind k) {
  return k == MessageKind::Probe || k == MessageKind::ProbeResponse;
}

// Time-stamped bus traffic. is_test is true exactly for probe traffic so the
// guardian can filter test data out of live operation.
struct Message {
  ComponentId sender;
  ComponentId receiver;
  MessageKind kind = MessageKind::Control;
  ValueList payload;
  VirtualTime sent_at = 0;
  bool is_test = false;
};

inline Message make_message(ComponentId sender, ComponentId receiver,
                            MessageKind kind, ValueList payload) {
  Message m;
  m.sender = std::move(sender);
  m.receiver = std::move(receiver);
  m.kind = kind;
  m.payload = std::move(payload);
  m.is_test = is_test_kind(kind);
  return m;
}

}  // namespace vigil::sim
