#include "vigil/model/supervised_actor.hpp"

#include <cstdio>
#include <utility>

namespace vigil::model {

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

namespace {

std::string store_fingerprint(const ParameterStore& store) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(store.to_json().dump())));
  return buf;
}

}  // namespace

SupervisedActor::SupervisedActor(ComponentId id, std::shared_ptr<Component> component,
                                 ComponentId output_sink, sim::VirtualTime bus_latency)
    : id_(std::move(id)),
      component_(std::move(component)),
      sink_(std::move(output_sink)),
      bus_latency_(bus_latency) {}

void SupervisedActor::configure_cascade(ComponentId successor, ComponentId guardian,
                                        sim::VirtualTime ping_period,
                                        sim::VirtualTime response_deadline) {
  cascade_ = CascadeLink{std::move(successor), std::move(guardian), ping_period,
                         response_deadline, std::nullopt};
}

Component::StepResult SupervisedActor::direct_step(Kernel& sim, const ValueList& inputs,
                                                   sim::VirtualTime now) {
  if (sim.is_down(id_) || sim.is_hanging(id_, now)) {
    raise(Err::NotRunning, "component '" + id_ + "' is not running");
  }
  Component::StepResult result = component_->step(inputs, now);
  log_instrumentation(sim);
  return result;
}

void SupervisedActor::log_instrumentation(Kernel& sim) {
  if (!instrument_) return;
  for (const std::string& point : component_->last_hits()) {
    sim.record(sim::tag::kDecision, id_, "", {point});
  }
  for (const ScalarParam& p : component_->params().scalars()) {
    sim.record(sim::tag::kParam, id_, "", {p.name, p.value});
  }
}

void SupervisedActor::handle_input(Kernel& sim, const Message& msg) {
  Component::StepResult result = component_->step(msg.payload, sim.now());
  log_instrumentation(sim);
  sim.send(make_message(id_, sink_, MessageKind::Output, std::move(result.outputs)),
           result.latency);
}

void SupervisedActor::handle_probe(Kernel& sim, const Message& msg) {
  if (msg.payload.empty() || !std::holds_alternative<std::string>(msg.payload[0])) {
    return;
  }
  std::string probe_id = str(msg.payload[0]);
  ValueList inputs(msg.payload.begin() + 1, msg.payload.end());

  // Test data must not perturb the run: the probe step executes against a
  // snapshot that is restored afterwards, with learning forced off while the
  // probe is processed.
  StateImage before = component_->snapshot();
  std::string fp_before = store_fingerprint(component_->params());
  bool learning = component_->params().learning_enabled();
  component_->params().set_learning_enabled(false);
  Component::StepResult result = component_->step(inputs, sim.now());
  component_->restore(before);
  component_->params().set_learning_enabled(learning);
  std::string fp_after = store_fingerprint(component_->params());
  sim.record(sim::tag::kFreezeCheck, id_, "", {probe_id, fp_before, fp_after}, true);

  ValueList payload;
  payload.emplace_back(probe_id);
  for (Value& v : result.outputs) payload.push_back(std::move(v));
  sim.send(make_message(id_, sink_, MessageKind::ProbeResponse, std::move(payload)),
           result.latency);
}

void SupervisedActor::on_message(Kernel& sim, const Message& msg) {
  switch (msg.kind) {
    case MessageKind::Input:
      handle_input(sim, msg);
      break;
    case MessageKind::Ping:
      sim.send(make_message(id_, msg.sender, MessageKind::Pong, msg.payload),
               bus_latency_);
      break;
    case MessageKind::Probe:
      handle_probe(sim, msg);
      break;
    case MessageKind::Pong:
      if (cascade_ && msg.sender == cascade_->successor) {
        cascade_->outstanding_since.reset();
      }
      break;
    case MessageKind::Control:
      if (!msg.payload.empty() && std::holds_alternative<std::string>(msg.payload[0]) &&
          str(msg.payload[0]) == "learn") {
        component_->learn(ValueList(msg.payload.begin() + 1, msg.payload.end()));
      }
      break;
    default:
      break;
  }
}

void SupervisedActor::on_tick(Kernel& sim, sim::VirtualTime now) {
  if (!cascade_) return;
  if (cascade_->outstanding_since &&
      now - *cascade_->outstanding_since >= cascade_->response_deadline) {
    double pinged_at = static_cast<double>(*cascade_->outstanding_since);
    cascade_->outstanding_since.reset();
    sim.send(make_message(id_, cascade_->guardian, MessageKind::Control,
                          {std::string("cascade_miss"), cascade_->successor, pinged_at}),
             bus_latency_);
  }
  if (now % cascade_->ping_period == 0 && !cascade_->outstanding_since) {
    cascade_->outstanding_since = now;
    sim.send(make_message(id_, cascade_->successor, MessageKind::Ping,
                          {static_cast<double>(now)}),
             bus_latency_);
  }
}

void SupervisedActor::on_restart(Kernel& sim, sim::VirtualTime now) {
  (void)sim, (void)now;
  component_->reinitialize();
}

void SupervisedActor::grow_cases(std::size_t n) {
  ParameterStore& store = component_->params();
  if (!store.case_base()) return;
  for (std::size_t i = 0; i < n; ++i) {
    store.case_base()->add({{static_cast<double>(leak_seq_++)}, 0.0});
  }
}

}  // namespace vigil::model
