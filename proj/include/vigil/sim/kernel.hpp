#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vigil/errors.hpp"
#include "vigil/sim/event_log.hpp"
#include "vigil/sim/fault.hpp"
#include "vigil/sim/message.hpp"
#include "vigil/sim/rng.hpp"

namespace vigil::sim {

class Kernel;

// A scheduling entity on the simulated bus. Tick hooks run once per tick,
// before that tick's deliveries, in registration order; this makes deadline
// checks deterministic against same-tick message arrivals.
class Actor {
 public:
  virtual ~Actor() = default;
  virtual void on_message(Kernel& sim, const Message& msg) = 0;
  virtual void on_tick(Kernel& sim, VirtualTime now) { (void)sim, (void)now; }
  // Reinitialization hook invoked when a guardian-ordered restart completes.
  virtual void on_restart(Kernel& sim, VirtualTime now) { (void)sim, (void)now; }
  // Surface for the LeakGrowth fault.
  virtual void grow_cases(std::size_t n) { (void)n; }
};

// Delivery filters rewrite the destination of messages addressed to a
// receiver (used by the guardian to pull probe responses out of the
// functional stream and to redirect inputs to a failover component).
struct Redirect {
  ComponentId to;
};
using FilterFn = std::function<std::optional<Redirect>(const Message&)>;

// Observers see every delivered message, after filtering.
using ObserverFn = std::function<void(Kernel&, const Message&, VirtualTime)>;

// Deterministic single-threaded discrete-event engine: virtual time, a
// message bus with configurable latency, and fault injection. One kernel
// instance owns one run; nothing is shared between runs.
class Kernel {
 public:
  explicit Kernel(std::uint64_t seed);

  void register_actor(const ComponentId& id, std::shared_ptr<Actor> actor,
                      bool wants_ticks = false);
  bool has_actor(const ComponentId& id) const;
  Actor* actor(const ComponentId& id) const;

  VirtualTime now() const { return now_; }
  Rng& rng() { return rng_; }
  EventLog& log() { return log_; }
  const EventLog& log() const { return log_; }

  // Enqueues a message for delivery at `at`. Same-tick events are delivered
  // after already-queued same-tick events (insertion order tie-break).
  void schedule(VirtualTime at, Message msg);

  // Stamps sent_at, applies CorruptOutput on the sender and Delay on the
  // receiver, and enqueues delivery at now + latency (+ extra).
  void send(Message msg, VirtualTime latency);

  void schedule_action(VirtualTime at, std::function<void(Kernel&)> action);

  void inject_fault(const FaultSpec& spec);
  const std::vector<FaultSpec>& faults() const { return faults_; }

  // Crashed or restarting: emits nothing, deliveries are dropped.
  bool is_down(const ComponentId& id) const;
  bool is_hanging(const ComponentId& id, VirtualTime at) const;

  // Marks the target down for `duration` ticks, then clears the crash state,
  // calls the actor's on_restart hook and the completion callback.
  void begin_restart(const ComponentId& id, VirtualTime duration,
                     std::function<void(Kernel&, VirtualTime)> on_complete = {});
  bool restart_in_progress(const ComponentId& id) const;

  // CorruptOutput application for callers that step components off the bus
  // (redundancy managers). Idempotent.
  ValueList apply_output_faults(const ComponentId& producer, VirtualTime at,
                                ValueList payload) const;

  void set_delivery_filter(const ComponentId& receiver, FilterFn fn);
  void clear_delivery_filter(const ComponentId& receiver);
  void add_observer(ObserverFn fn);

  // Appends a state-transition record at the current time.
  void record(std::string kind, ComponentId sender, ComponentId receiver,
              ValueList payload, bool is_test = false);

  // Processes every event with time < t_end, advancing virtual time.
  // May be called repeatedly with non-decreasing horizons.
  const EventLog& run_until(VirtualTime t_end);

 private:
  struct QueuedEvent {
    VirtualTime at = 0;
    std::uint64_t seq = 0;
    bool is_action = false;
    Message msg;
    std::function<void(Kernel&)> action;
  };

  struct ActorEntry {
    std::shared_ptr<Actor> actor;
    bool crashed = false;
    bool restarting = false;
  };

  void push_event(QueuedEvent ev);
  void process_tick();
  void apply_fault_edges();
  void deliver(QueuedEvent& ev);

  VirtualTime now_ = 0;
  std::uint64_t next_seq_ = 0;
  Rng rng_;
  EventLog log_;
  std::vector<QueuedEvent> heap_;
  std::map<ComponentId, ActorEntry> actors_;
  std::vector<ComponentId> tick_order_;
  std::vector<FaultSpec> faults_;
  std::map<ComponentId, FilterFn> filters_;
  std::vector<ObserverFn> observers_;
};

}  // namespace vigil::sim
