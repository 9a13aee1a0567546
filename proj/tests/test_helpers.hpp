#pragma once

#include <memory>
#include <string>
#include <vector>

#include "vigil/sim/kernel.hpp"

namespace vigil::test {

using sim::Kernel;
using sim::Message;
using sim::MessageKind;

// Sink that remembers everything delivered to it.
class Collector : public sim::Actor {
 public:
  void on_message(Kernel&, const Message& msg) override { seen.push_back(msg); }
  std::vector<Message> seen;
};

// Echoes every Input back to a fixed sink as an Output after `latency`.
class Echo : public sim::Actor {
 public:
  Echo(std::string id, std::string sink, sim::VirtualTime latency = 1)
      : id_(std::move(id)), sink_(std::move(sink)), latency_(latency) {}

  void on_message(Kernel& sim, const Message& msg) override {
    if (msg.kind != MessageKind::Input) return;
    sim.send(make_message(id_, sink_, MessageKind::Output, msg.payload), latency_);
  }

 private:
  std::string id_, sink_;
  sim::VirtualTime latency_;
};

// Emits one Output per tick while alive.
class Beacon : public sim::Actor {
 public:
  Beacon(std::string id, std::string sink) : id_(std::move(id)), sink_(std::move(sink)) {}
  void on_message(Kernel&, const Message&) override {}
  void on_tick(Kernel& sim, sim::VirtualTime now) override {
    sim.send(make_message(id_, sink_, MessageKind::Output,
                          {static_cast<double>(now)}),
             0);
  }

 private:
  std::string id_, sink_;
};

}  // namespace vigil::test
