#include "vigil/guardian/guardian.hpp"

#include <algorithm>

namespace vigil::guardian {

const char* verdict_kind_name(VerdictKind k) {
  switch (k) {
    case VerdictKind::Ok: return "ok";
    case VerdictKind::Defect: return "defect";
    case VerdictKind::Failure: return "failure";
  }
  return "unknown";
}

const char* cause_name(Cause c) {
  switch (c) {
    case Cause::None: return "none";
    case Cause::MissedPong: return "missed_pong";
    case Cause::ProbeOutOfBand: return "probe_out_of_band";
    case Cause::WatchdogImplausible: return "watchdog_implausible";
    case Cause::ParamOutOfRange: return "param_out_of_range";
    case Cause::BudgetExceeded: return "budget_exceeded";
    case Cause::DeadlineMiss: return "deadline_miss";
    case Cause::VoteFailure: return "vote_failure";
    case Cause::VoteDissent: return "vote_dissent";
    case Cause::BothFailed: return "both_failed";
    case Cause::DivergenceExceeded: return "divergence_exceeded";
  }
  return "unknown";
}

void record_verdict(Kernel& sim, const Verdict& v, const ComponentId& emitter,
                    ValueList extra) {
  ValueList payload{std::string(verdict_kind_name(v.kind)),
                    std::string(cause_name(v.cause))};
  for (Value& e : extra) payload.push_back(std::move(e));
  sim.record(sim::tag::kVerdict, v.subject, emitter, std::move(payload));
}

bool Band::contains(const Value& v) const {
  if (interval) {
    if (!is_num(v)) return false;
    return num(v) >= interval->first && num(v) <= interval->second;
  }
  for (const Value& adm : admissible) {
    if (adm == v) return true;
  }
  return false;
}

void GuardianConfig::validate() const {
  if (response_deadline >= ping_period) {
    raise(Err::SchemaViolation, "guardian: response_deadline must be < ping_period");
  }
  if (max_restarts < 0) {
    raise(Err::SchemaViolation, "guardian: max_restarts must be >= 0");
  }
  for (const ProbeScheduleEntry& entry : probe_schedule) {
    for (const Band& band : entry.probe.acceptance_band) {
      if (!band.valid()) {
        raise(Err::SchemaViolation,
              "probe '" + entry.probe.probe_id + "': empty acceptance band");
      }
    }
  }
}

Guardian::Guardian(ComponentId id, GuardianConfig config)
    : id_(std::move(id)), config_(std::move(config)) {
  config_.validate();
  for (const ProbeScheduleEntry& entry : config_.probe_schedule) {
    pending_probes_.push_back({entry, false});
  }
}

void Guardian::supervise(const ComponentId& target) {
  flat_targets_.push_back(target);
  targets_.emplace(target, TargetState{});
}

void Guardian::form_cascade(Kernel& sim, const std::vector<ComponentId>& order) {
  if (order.empty()) raise(Err::SchemaViolation, "cascade order must be nonempty");
  std::set<ComponentId> seen;
  for (const ComponentId& member : order) {
    if (!seen.insert(member).second) {
      raise(Err::DuplicateMember, "cascade member '" + member + "' listed twice");
    }
    if (!sim.has_actor(member)) {
      raise(Err::UnknownTarget, "cascade member '" + member + "' not registered");
    }
  }
  cascade_order_ = order;
  for (const ComponentId& member : order) targets_.emplace(member, TargetState{});
  for (std::size_t i = 0; i + 1 < order.size(); ++i) {
    auto* actor = supervised_actor(sim, order[i]);
    if (actor == nullptr) {
      raise(Err::UnknownTarget, "cascade member '" + order[i] + "' cannot ping");
    }
    actor->configure_cascade(order[i + 1], id_, config_.ping_period,
                             config_.response_deadline);
  }
}

void Guardian::attach(Kernel& sim, const ComponentId& sink) {
  sink_ = sink;
  // Test responses never reach live operation: anything tagged is_test that
  // is bound for the system boundary is rerouted to the guardian.
  sim.set_delivery_filter(sink, [me = id_](const Message& msg) -> std::optional<sim::Redirect> {
    if (msg.is_test) return sim::Redirect{me};
    return std::nullopt;
  });
  sim.add_observer([this](Kernel& k, const Message& msg, VirtualTime now) {
    observe_delivery(k, msg, now);
  });
}

void Guardian::set_watchdog(const ComponentId& target, std::string name,
                            Plausibility pred) {
  watchdogs_[target] = {std::move(name), std::move(pred)};
}

Guardian::TargetState& Guardian::target_state(const ComponentId& target) {
  return targets_[target];
}

Mode Guardian::target_mode(const ComponentId& target) const {
  auto it = targets_.find(target);
  return it == targets_.end() ? Mode::Normal : it->second.mode;
}

GuardianState Guardian::state() const {
  GuardianState s;
  s.outstanding_pings = outstanding_pings_;
  for (const auto& [id, probe] : outstanding_probes_) {
    s.outstanding_probes[id] = probe.sent_at;
  }
  for (const auto& [target, st] : targets_) {
    s.restarts_used += st.restarts_used;
    if (st.mode == Mode::Failover && s.mode != Mode::Restarting) s.mode = Mode::Failover;
    if (st.mode == Mode::Restarting) s.mode = Mode::Restarting;
  }
  return s;
}

std::vector<ComponentId> Guardian::pinged_targets() const {
  if (!cascade_order_.empty()) return {cascade_order_.front()};
  return flat_targets_;
}

std::vector<ComponentId> Guardian::monitored_targets() const {
  std::vector<ComponentId> all = flat_targets_;
  all.insert(all.end(), cascade_order_.begin(), cascade_order_.end());
  return all;
}

model::SupervisedActor* Guardian::supervised_actor(Kernel& sim,
                                                   const ComponentId& target) const {
  return dynamic_cast<model::SupervisedActor*>(sim.actor(target));
}

void Guardian::tick(Kernel& sim, VirtualTime now) {
  evaluate_deadlines(sim, now);
  if (now % config_.ping_period == 0) send_pings(sim, now);
  dispatch_due_probes(sim, now);
  if (now % config_.monitor_period == 0) run_monitors(sim, now);
}

void Guardian::on_tick(Kernel& sim, VirtualTime now) { tick(sim, now); }

void Guardian::send_pings(Kernel& sim, VirtualTime now) {
  for (const ComponentId& target : pinged_targets()) {
    TargetState& st = target_state(target);
    if (st.mode != Mode::Normal || st.abandoned) continue;
    outstanding_pings_[target] = now;
    sim.send(make_message(id_, target, sim::MessageKind::Ping,
                          {static_cast<double>(now)}),
             bus_latency_);
  }
}

std::vector<Verdict> Guardian::evaluate_deadlines(Kernel& sim, VirtualTime now) {
  std::vector<Verdict> verdicts;
  std::vector<ComponentId> missed_pings;
  for (const auto& [target, sent] : outstanding_pings_) {
    if (now - sent >= config_.response_deadline) missed_pings.push_back(target);
  }
  for (const ComponentId& target : missed_pings) {
    outstanding_pings_.erase(target);
    Verdict v{target, VerdictKind::Defect, Cause::MissedPong, now};
    record_verdict(sim, v, id_);
    verdicts.push_back(v);
    restart(sim, target, now, Cause::MissedPong);
  }
  std::vector<std::string> missed_probes;
  for (const auto& [probe_id, out] : outstanding_probes_) {
    if (now - out.sent_at >= config_.response_deadline) missed_probes.push_back(probe_id);
  }
  for (const std::string& probe_id : missed_probes) {
    ComponentId target = outstanding_probes_[probe_id].target;
    outstanding_probes_.erase(probe_id);
    Verdict v{target, VerdictKind::Defect, Cause::DeadlineMiss, now};
    record_verdict(sim, v, id_, {probe_id});
    verdicts.push_back(v);
    restart(sim, target, now, Cause::DeadlineMiss);
  }
  return verdicts;
}

void Guardian::restart(Kernel& sim, const ComponentId& target, VirtualTime now,
                       Cause cause) {
  TargetState& st = target_state(target);
  if (st.mode == Mode::Restarting || st.abandoned) return;
  outstanding_pings_.erase(target);

  if (st.restarts_used >= config_.max_restarts) {
    // Budget exhausted: hold the fallback permanently if one exists,
    // otherwise the function is gone for good, which is a system failure.
    st.abandoned = true;
    if (config_.failover_target) {
      st.mode = Mode::Failover;
      sim.record(sim::tag::kFailoverOn, id_, target, {*config_.failover_target});
      sim.record(sim::tag::kAbandoned, id_, target,
                 {std::string("restart_budget_exhausted")});
      ComponentId fallback = *config_.failover_target;
      sim.set_delivery_filter(target, [fallback](const Message& msg)
                                          -> std::optional<sim::Redirect> {
        if (msg.kind == sim::MessageKind::Input) return sim::Redirect{fallback};
        return std::nullopt;
      });
    } else {
      sim.record(sim::tag::kAbandoned, id_, target,
                 {std::string("restart_budget_exhausted")});
      record_verdict(sim, {target, VerdictKind::Failure, cause, now}, id_);
    }
    return;
  }

  st.restarts_used += 1;
  if (config_.failover_target && *config_.failover_target != target) {
    st.mode = Mode::Failover;
    ComponentId fallback = *config_.failover_target;
    sim.record(sim::tag::kFailoverOn, id_, target, {fallback});
    sim.set_delivery_filter(target, [fallback](const Message& msg)
                                        -> std::optional<sim::Redirect> {
      if (msg.kind == sim::MessageKind::Input) return sim::Redirect{fallback};
      return std::nullopt;
    });
  } else {
    st.mode = Mode::Restarting;
  }
  sim.begin_restart(target, config_.restart_duration,
                    [this, target](Kernel& k, VirtualTime at) {
                      TargetState& ts = target_state(target);
                      if (ts.mode == Mode::Failover) {
                        k.clear_delivery_filter(target);
                        k.record(sim::tag::kFailoverOff, id_, target, {});
                      }
                      ts.mode = Mode::Normal;
                      ts.last_restart_complete = at;
                    });
}

void Guardian::dispatch_due_probes(Kernel& sim, VirtualTime now) {
  bool critical = critical_ && critical_(now);
  std::deque<PendingProbe> still_pending;
  for (PendingProbe& pending : pending_probes_) {
    if (pending.entry.earliest > now) {
      still_pending.push_back(std::move(pending));
      continue;
    }
    TargetState& st = target_state(pending.entry.target);
    if (st.abandoned) {
      sim.record(sim::tag::kProbeDeferred, id_, pending.entry.target,
                 {pending.entry.probe.probe_id, std::string("target_abandoned")});
      continue;
    }
    if (critical || st.mode != Mode::Normal) {
      // Deferred, never dropped silently. Logged once per deferral episode
      // and retried every tick until the situation clears.
      if (!pending.deferral_logged) {
        sim.record(sim::tag::kProbeDeferred, id_, pending.entry.target,
                   {pending.entry.probe.probe_id,
                    std::string(critical ? "situation_critical" : "target_unavailable")});
        pending.deferral_logged = true;
      }
      still_pending.push_back(std::move(pending));
      continue;
    }
    inject_probe(sim, pending.entry, now, false);
  }
  pending_probes_ = std::move(still_pending);
}

void Guardian::inject_probe(Kernel& sim, ProbeScheduleEntry entry, VirtualTime now,
                            bool situation_critical) {
  if (situation_critical) {
    sim.record(sim::tag::kProbeDeferred, id_, entry.target,
               {entry.probe.probe_id, std::string("situation_critical")});
    pending_probes_.push_back({std::move(entry), true});
    return;
  }
  ValueList payload;
  payload.emplace_back(entry.probe.probe_id);
  for (const Value& v : entry.probe.inputs) payload.push_back(v);
  known_probe_ids_.insert(entry.probe.probe_id);
  outstanding_probes_[entry.probe.probe_id] =
      OutstandingProbe{now, entry.target, entry.probe};
  sim.send(make_message(id_, entry.target, sim::MessageKind::Probe, std::move(payload)),
           bus_latency_);
}

Verdict Guardian::check_probe_response(Kernel& sim, const Message& resp,
                                       VirtualTime now) {
  if (resp.payload.empty() || !std::holds_alternative<std::string>(resp.payload[0])) {
    raise(Err::UnknownProbeId, "probe response without probe id");
  }
  std::string probe_id = str(resp.payload[0]);
  auto it = outstanding_probes_.find(probe_id);
  if (it == outstanding_probes_.end()) {
    if (known_probe_ids_.count(probe_id)) {
      // Late response after a deadline verdict: ignored, the restart stands.
      return {resp.sender, VerdictKind::Ok, Cause::None, now};
    }
    raise(Err::UnknownProbeId, "unknown probe id '" + probe_id + "'");
  }
  OutstandingProbe out = std::move(it->second);
  outstanding_probes_.erase(it);

  ValueList channels(resp.payload.begin() + 1, resp.payload.end());
  bool in_band = channels.size() >= out.probe.acceptance_band.size();
  for (std::size_t c = 0; in_band && c < out.probe.acceptance_band.size(); ++c) {
    in_band = out.probe.acceptance_band[c].contains(channels[c]);
  }
  if (in_band) {
    Verdict v{out.target, VerdictKind::Ok, Cause::None, now};
    record_verdict(sim, v, id_, {probe_id});
    return v;
  }
  Verdict v{out.target, VerdictKind::Defect, Cause::ProbeOutOfBand, now};
  record_verdict(sim, v, id_, {probe_id});
  restart(sim, out.target, now, Cause::ProbeOutOfBand);
  return v;
}

std::vector<Verdict> Guardian::run_monitors(Kernel& sim, VirtualTime now) {
  std::vector<Verdict> verdicts;
  for (const ComponentId& target : monitored_targets()) {
    if (sim.is_down(target)) continue;
    model::SupervisedActor* actor = supervised_actor(sim, target);
    if (actor == nullptr) continue;
    model::ParameterStore& store = actor->component().params();
    for (const model::BoundViolation& violation : store.check_ranges()) {
      model::ScalarParam* p = store.find(violation.name);
      double bad_value = p->value;
      p->value = p->init;
      Verdict v{target, VerdictKind::Defect, Cause::ParamOutOfRange, now};
      record_verdict(sim, v, id_, {violation.name, bad_value});
      verdicts.push_back(v);
    }
    if (store.case_base() && store.case_base()->policy() == model::Forgetting::None &&
        store.case_base()->size() > config_.memory_budget) {
      double before = static_cast<double>(store.case_base()->size());
      store.case_base()->force_evict_to(config_.memory_budget);
      Verdict v{target, VerdictKind::Defect, Cause::BudgetExceeded, now};
      record_verdict(sim, v, id_, {before, static_cast<double>(config_.memory_budget)});
      verdicts.push_back(v);
    }
  }
  return verdicts;
}

std::vector<Message> Guardian::filter(const std::vector<Message>& outbound) {
  std::vector<Message> functional;
  functional.reserve(outbound.size());
  for (const Message& msg : outbound) {
    if (!msg.is_test) functional.push_back(msg);
  }
  return functional;
}

Verdict Guardian::watchdog_check(const ComponentId& subject,
                                 const std::deque<ValueList>& inputs_window,
                                 const ValueList& output, const Plausibility& predicate,
                                 VirtualTime now) {
  if (predicate(inputs_window, output)) {
    return {subject, VerdictKind::Ok, Cause::None, now};
  }
  return {subject, VerdictKind::Defect, Cause::WatchdogImplausible, now};
}

void Guardian::observe_delivery(Kernel& sim, const Message& msg, VirtualTime now) {
  if (msg.kind == sim::MessageKind::Input && targets_.count(msg.receiver)) {
    std::deque<ValueList>& window = input_windows_[msg.receiver];
    window.push_back(msg.payload);
    while (window.size() > 8) window.pop_front();
  }
  if (msg.kind == sim::MessageKind::Output && msg.receiver == sink_) {
    auto dog = watchdogs_.find(msg.sender);
    if (dog != watchdogs_.end()) {
      Verdict v = watchdog_check(msg.sender, input_windows_[msg.sender], msg.payload,
                                 dog->second.second, now);
      if (v.kind != VerdictKind::Ok) {
        record_verdict(sim, v, id_, {dog->second.first});
      }
    }
  }
}

void Guardian::handle_cascade_miss(Kernel& sim, const Message& msg) {
  if (msg.payload.size() < 2) return;
  ComponentId target = str(msg.payload[1]);
  TargetState& st = target_state(target);
  if (st.mode != Mode::Normal || st.abandoned) return;
  if (msg.payload.size() >= 3 && is_num(msg.payload[2]) &&
      static_cast<VirtualTime>(num(msg.payload[2])) < st.last_restart_complete) {
    return;  // stale report from before the restart finished
  }
  Verdict v{target, VerdictKind::Defect, Cause::MissedPong, sim.now()};
  record_verdict(sim, v, id_, {std::string("cascade_report"), msg.sender});
  restart(sim, target, sim.now(), Cause::MissedPong);
}

void Guardian::on_message(Kernel& sim, const Message& msg) {
  switch (msg.kind) {
    case sim::MessageKind::Pong:
      outstanding_pings_.erase(msg.sender);
      break;
    case sim::MessageKind::ProbeResponse:
      check_probe_response(sim, msg, sim.now());
      break;
    case sim::MessageKind::Control:
      if (!msg.payload.empty() && std::holds_alternative<std::string>(msg.payload[0]) &&
          str(msg.payload[0]) == "cascade_miss") {
        handle_cascade_miss(sim, msg);
      }
      break;
    default:
      break;
  }
}

}  // namespace vigil::guardian
