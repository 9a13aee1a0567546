#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "vigil/model/component.hpp"
#include "vigil/sim/kernel.hpp"

namespace vigil::model {

using sim::ComponentId;
using sim::Kernel;
using sim::Message;
using sim::MessageKind;

std::uint64_t fnv1a(const std::string& bytes);

// Bridges a Component onto the simulated bus: steps on Input, answers Ping,
// processes Probe traffic in a sandbox, applies Control-borne learning, and
// optionally supervises a cascade successor.
class SupervisedActor : public sim::Actor {
 public:
  SupervisedActor(ComponentId id, std::shared_ptr<Component> component,
                  ComponentId output_sink, sim::VirtualTime bus_latency = 1);

  Component& component() { return *component_; }
  const Component& component() const { return *component_; }
  const ComponentId& id() const { return id_; }

  // Member-side half of a cascaded chain: ping the successor every period and
  // report a missed pong to the guardian.
  void configure_cascade(ComponentId successor, ComponentId guardian,
                         sim::VirtualTime ping_period,
                         sim::VirtualTime response_deadline);

  // Emit one "decision" record per executed decision point and one "param"
  // record per adaptive scalar on every functional step.
  void set_instrumentation(bool on) { instrument_ = on; }

  // Off-bus stepping for redundancy managers. NotRunning when the component
  // is crashed or restarting.
  Component::StepResult direct_step(Kernel& sim, const ValueList& inputs,
                                    sim::VirtualTime now);

  void on_message(Kernel& sim, const Message& msg) override;
  void on_tick(Kernel& sim, sim::VirtualTime now) override;
  void on_restart(Kernel& sim, sim::VirtualTime now) override;
  void grow_cases(std::size_t n) override;

 private:
  void handle_input(Kernel& sim, const Message& msg);
  void handle_probe(Kernel& sim, const Message& msg);
  void log_instrumentation(Kernel& sim);

  ComponentId id_;
  std::shared_ptr<Component> component_;
  ComponentId sink_;
  sim::VirtualTime bus_latency_ = 1;
  bool instrument_ = true;

  struct CascadeLink {
    ComponentId successor;
    ComponentId guardian;
    sim::VirtualTime ping_period = 100;
    sim::VirtualTime response_deadline = 20;
    std::optional<sim::VirtualTime> outstanding_since;
  };
  std::optional<CascadeLink> cascade_;
  std::uint64_t leak_seq_ = 0;
};

}  // namespace vigil::model
