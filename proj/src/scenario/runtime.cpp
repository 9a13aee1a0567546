#include "vigil/scenario/runtime.hpp"

#include <algorithm>
#include <deque>

#include "vigil/demo/overtake.hpp"
#include "vigil/model/supervised_actor.hpp"
#include "vigil/redundancy/redundancy.hpp"
#include "vigil/scenario/report.hpp"

namespace vigil::scenario {

namespace {

using sim::Kernel;
using sim::Message;
using sim::VirtualTime;

// Emits one Input per sample period to the function under test and delivers
// scheduled comfort feedback. Open loop: the world does not react to the
// decisions.
class TrafficSource : public sim::Actor {
 public:
  TrafficSource(const Scenario& s, ComponentId input_target)
      : scenario_(s), input_target_(std::move(input_target)) {}

  void on_message(Kernel&, const Message&) override {}

  void on_tick(Kernel& sim, VirtualTime now) override {
    const TrafficSpec& traffic = scenario_.traffic;
    bool emit_window =
        now % traffic.sample_period == 0 &&
        now + scenario_.function_deadline < scenario_.duration;
    if (emit_window) {
      ValueList snapshot;
      if (traffic.generator) {
        snapshot = demo::sample_world(*traffic.generator, now, &sim.rng()).to_values();
      } else if (!traffic.trace.empty()) {
        std::size_t i = static_cast<std::size_t>(now / traffic.sample_period);
        snapshot = traffic.trace[std::min(i, traffic.trace.size() - 1)];
      }
      if (!snapshot.empty()) {
        sim.send(make_message(kSourceId, input_target_, sim::MessageKind::Input,
                              std::move(snapshot)),
                 scenario_.bus_latency);
      }
    }
    for (const FeedbackEvent& fb : scenario_.feedback) {
      if (fb.at == now) {
        sim.send(make_message(kSourceId, fb.target, sim::MessageKind::Control,
                              {std::string("learn"), fb.value}),
                 scenario_.bus_latency);
      }
    }
  }

 private:
  const Scenario scenario_;
  ComponentId input_target_;
};

// System boundary: collects the functional output stream and declares a
// Failure whenever a demanded response is absent at its deadline. A response
// window [s, s+deadline) opens at every sample tick.
class BoundaryMonitor : public sim::Actor {
 public:
  BoundaryMonitor(const Scenario& s, ComponentId subject)
      : period_(s.traffic.sample_period),
        deadline_(s.function_deadline),
        duration_(s.duration),
        subject_(std::move(subject)) {}

  void on_tick(Kernel& sim, VirtualTime now) override {
    if (now % period_ == 0 && now + deadline_ < duration_) {
      windows_.push_back({now, false});
    }
    while (!windows_.empty() && windows_.front().start + deadline_ <= now) {
      if (!windows_.front().satisfied) {
        guardian::record_verdict(
            sim,
            {subject_, guardian::VerdictKind::Failure, guardian::Cause::DeadlineMiss,
             now},
            kSinkId, {static_cast<double>(windows_.front().start)});
      }
      windows_.pop_front();
    }
  }

  void on_message(Kernel&, const Message& msg) override {
    if (msg.kind != sim::MessageKind::Output || msg.is_test) return;
    // Windows close at their deadline tick before deliveries run, so at most
    // one window is open here and any arrival belongs to it.
    if (!windows_.empty()) windows_.back().satisfied = true;
  }

 private:
  struct Window {
    VirtualTime start = 0;
    bool satisfied = false;
  };
  VirtualTime period_;
  VirtualTime deadline_;
  VirtualTime duration_;
  ComponentId subject_;
  std::deque<Window> windows_;
};

}  // namespace

model::Component* Runtime::component(const ComponentId& id) const {
  for (const auto& [cid, comp] : components) {
    if (cid == id) return comp.get();
  }
  return nullptr;
}

Runtime build_runtime(Scenario s, std::optional<std::uint64_t> seed_override,
                      std::optional<bool> guardian_override) {
  if (seed_override) s.seed = *seed_override;
  if (guardian_override) s.guardian.enabled = *guardian_override;
  s.validate();

  Runtime rt;
  rt.scenario = s;
  rt.input_target = s.resolved_input_target();
  rt.kernel = std::make_unique<Kernel>(s.seed);
  Kernel& sim = *rt.kernel;

  // Source first so inputs of a tick precede supervision work of that tick.
  auto source = std::make_shared<TrafficSource>(s, rt.input_target);
  sim.register_actor(kSourceId, source, true);

  for (const ComponentSpec& spec : s.components) {
    std::shared_ptr<model::Component> comp;
    if (spec.type == "overtake") {
      std::optional<model::CaseBase> cb;
      if (spec.case_base) cb = model::CaseBase(spec.case_base->first, spec.case_base->second);
      comp = std::make_shared<demo::OvertakeDecider>(spec.params, spec.cost, cb);
    } else {
      comp = std::make_shared<demo::FallbackKeeper>(spec.cost);
    }
    if (spec.type == "overtake") comp->params().set_learning_enabled(spec.learning_enabled);
    auto actor = std::make_shared<model::SupervisedActor>(spec.id, comp, kSinkId,
                                                          s.bus_latency);
    sim.register_actor(spec.id, actor, true);
    rt.components.emplace_back(spec.id, std::move(comp));
  }

  for (const RedundancySpec& r : s.redundancy) {
    redundancy::RedundancyGroup group = r.group;
    if (group.mode == redundancy::RedundancyMode::ReinitializedCopy &&
        group.divergence_threshold.empty()) {
      // Default divergence tolerance: the width of the first interval band a
      // probe declares, the one tolerance the scenario author already owns.
      for (const guardian::ProbeScheduleEntry& p : s.guardian.config.probe_schedule) {
        for (const guardian::Band& band : p.probe.acceptance_band) {
          if (band.interval) {
            group.divergence_threshold.assign(
                8, band.interval->second - band.interval->first);
            break;
          }
        }
        if (!group.divergence_threshold.empty()) break;
      }
    }
    auto manager = std::make_shared<redundancy::RedundancyManager>(
        r.group_id, group, kSinkId,
        s.guardian.enabled ? std::optional<ComponentId>(kGuardianId) : std::nullopt);
    sim.register_actor(r.group_id, manager, false);
  }

  if (s.guardian.enabled) {
    rt.guard = std::make_shared<guardian::Guardian>(kGuardianId, s.guardian.config);
    rt.guard->set_bus_latency(s.bus_latency);
    sim.register_actor(kGuardianId, rt.guard, true);
  }

  auto monitor = std::make_shared<BoundaryMonitor>(s, rt.input_target);
  sim.register_actor(kSinkId, monitor, true);

  if (rt.guard) {
    if (s.supervision.mode == SupervisionSpec::Mode::Flat) {
      for (const ComponentId& t : s.supervision.targets) rt.guard->supervise(t);
    } else if (s.supervision.mode == SupervisionSpec::Mode::Cascade) {
      rt.guard->form_cascade(sim, s.supervision.targets);
    }
    rt.guard->attach(sim, kSinkId);
    if (!s.criticality.empty()) {
      auto windows = s.criticality;
      rt.guard->set_criticality([windows](VirtualTime t) {
        for (const auto& [from, until] : windows) {
          if (t >= from && t < until) return true;
        }
        return false;
      });
    }
    for (const WatchdogSpec& w : s.guardian.watchdogs) {
      rt.guard->set_watchdog(w.target, w.predicate, demo::demo_plausibility(w.predicate));
    }
  }

  for (const sim::FaultSpec& f : s.faults) sim.inject_fault(f);

  write_meta_records(sim, rt);
  return rt;
}

RunOutput run_scenario(const Scenario& s, std::optional<std::uint64_t> seed_override,
                       std::optional<bool> guardian_override) {
  Runtime rt = build_runtime(s, seed_override, guardian_override);
  rt.kernel->run_until(rt.scenario.duration);
  RunOutput out;
  out.log = rt.kernel->log();
  out.report = compute_report(out.log);
  return out;
}

}  // namespace vigil::scenario
