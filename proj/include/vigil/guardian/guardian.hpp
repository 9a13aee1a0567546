#pragma once

#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "vigil/model/supervised_actor.hpp"
#include "vigil/sim/kernel.hpp"

namespace vigil::guardian {

using sim::ComponentId;
using sim::Kernel;
using sim::Message;
using sim::VirtualTime;

enum class VerdictKind { Ok, Defect, Failure };

enum class Cause {
  None,
  MissedPong,
  ProbeOutOfBand,
  WatchdogImplausible,
  ParamOutOfRange,
  BudgetExceeded,
  DeadlineMiss,
  VoteFailure,
  VoteDissent,
  BothFailed,
  DivergenceExceeded,
};

const char* verdict_kind_name(VerdictKind k);
const char* cause_name(Cause c);

// A Failure is a condition observable at the system boundary; a Defect is
// detected and contained internally.
struct Verdict {
  ComponentId subject;
  VerdictKind kind = VerdictKind::Ok;
  Cause cause = Cause::None;
  VirtualTime at = 0;
};

void record_verdict(Kernel& sim, const Verdict& v, const ComponentId& emitter,
                    ValueList extra = {});

// Admissible responses on one probe channel: a closed interval or a finite
// set. The band is fixed in the guardian, never learned.
struct Band {
  std::optional<std::pair<double, double>> interval;
  std::vector<Value> admissible;

  bool contains(const Value& v) const;
  bool valid() const { return interval.has_value() || !admissible.empty(); }
};

struct TestProbe {
  std::string probe_id;
  ValueList inputs;
  std::vector<Band> acceptance_band;  // per output channel, from channel 0
};

struct ProbeScheduleEntry {
  TestProbe probe;
  VirtualTime earliest = 0;
  ComponentId target;
};

struct GuardianConfig {
  VirtualTime ping_period = 100;
  VirtualTime response_deadline = 20;  // must be < ping_period
  VirtualTime restart_duration = 50;
  int max_restarts = 3;
  std::optional<ComponentId> failover_target;
  std::vector<ProbeScheduleEntry> probe_schedule;
  VirtualTime monitor_period = 100;
  std::size_t memory_budget = 64;

  void validate() const;
};

enum class Mode { Normal, Failover, Restarting };

struct GuardianState {
  Mode mode = Mode::Normal;
  int restarts_used = 0;
  std::map<ComponentId, VirtualTime> outstanding_pings;
  std::map<std::string, VirtualTime> outstanding_probes;
};

// Plausibility predicates must be total over any window, including empty.
using Plausibility =
    std::function<bool(const std::deque<ValueList>& inputs_window, const ValueList& output)>;
using CriticalityFn = std::function<bool(VirtualTime)>;

// The central supervision unit: periodic ping with deadline detection,
// restart/reinitialize with failover, cascaded chains, probe injection with
// acceptance-band checking and response filtering, plus watchdog and
// parameter/resource monitors.
class Guardian : public sim::Actor {
 public:
  Guardian(ComponentId id, GuardianConfig config);

  const ComponentId& id() const { return id_; }
  const GuardianConfig& config() const { return config_; }

  void supervise(const ComponentId& target);
  void form_cascade(Kernel& sim, const std::vector<ComponentId>& order);

  // Installs the probe-response filter on the sink and the delivery observer
  // used by the watchdog. Call once after all actors are registered.
  void attach(Kernel& sim, const ComponentId& sink);

  void set_criticality(CriticalityFn fn) { critical_ = std::move(fn); }
  void set_watchdog(const ComponentId& target, std::string name, Plausibility pred);
  void set_bus_latency(VirtualTime latency) { bus_latency_ = latency; }

  GuardianState state() const;
  Mode target_mode(const ComponentId& target) const;

  // Periodic duties at `now`: deadline evaluation, pings at multiples of
  // ping_period, due probes, monitors at multiples of monitor_period.
  void tick(Kernel& sim, VirtualTime now);

  std::vector<Verdict> evaluate_deadlines(Kernel& sim, VirtualTime now);
  void restart(Kernel& sim, const ComponentId& target, VirtualTime now, Cause cause);
  void inject_probe(Kernel& sim, ProbeScheduleEntry entry, VirtualTime now,
                    bool situation_critical);
  Verdict check_probe_response(Kernel& sim, const Message& resp, VirtualTime now);
  std::vector<Verdict> run_monitors(Kernel& sim, VirtualTime now);

  // Pure response filtering: keeps exactly the functional messages, order
  // preserved; probe responses belong to the guardian alone.
  static std::vector<Message> filter(const std::vector<Message>& outbound);

  static Verdict watchdog_check(const ComponentId& subject,
                                const std::deque<ValueList>& inputs_window,
                                const ValueList& output, const Plausibility& predicate,
                                VirtualTime now);

  void on_message(Kernel& sim, const Message& msg) override;
  void on_tick(Kernel& sim, VirtualTime now) override;

 private:
  struct TargetState {
    Mode mode = Mode::Normal;
    bool abandoned = false;
    int restarts_used = 0;
    VirtualTime last_restart_complete = 0;
  };

  struct PendingProbe {
    ProbeScheduleEntry entry;
    bool deferral_logged = false;
  };

  struct OutstandingProbe {
    VirtualTime sent_at = 0;
    ComponentId target;
    TestProbe probe;
  };

  void send_pings(Kernel& sim, VirtualTime now);
  void dispatch_due_probes(Kernel& sim, VirtualTime now);
  void handle_cascade_miss(Kernel& sim, const Message& msg);
  void observe_delivery(Kernel& sim, const Message& msg, VirtualTime now);
  model::SupervisedActor* supervised_actor(Kernel& sim, const ComponentId& target) const;
  std::vector<ComponentId> pinged_targets() const;
  std::vector<ComponentId> monitored_targets() const;
  TargetState& target_state(const ComponentId& target);

  ComponentId id_;
  GuardianConfig config_;
  VirtualTime bus_latency_ = 1;
  ComponentId sink_;
  std::vector<ComponentId> flat_targets_;
  std::vector<ComponentId> cascade_order_;
  CriticalityFn critical_;
  std::map<ComponentId, std::pair<std::string, Plausibility>> watchdogs_;
  std::map<ComponentId, std::deque<ValueList>> input_windows_;
  std::map<ComponentId, TargetState> targets_;
  std::map<ComponentId, VirtualTime> outstanding_pings_;
  std::map<std::string, OutstandingProbe> outstanding_probes_;
  std::set<std::string> known_probe_ids_;
  std::deque<PendingProbe> pending_probes_;
};

}  // namespace vigil::guardian
