#include "vigil/sim/kernel.hpp"

#include <algorithm>

namespace vigil::sim {

Kernel::Kernel(std::uint64_t seed) : rng_(seed), log_(seed) {}

void Kernel::register_actor(const ComponentId& id, std::shared_ptr<Actor> actor,
                            bool wants_ticks) {
  actors_[id] = ActorEntry{std::move(actor), false, false};
  if (wants_ticks) tick_order_.push_back(id);
}

bool Kernel::has_actor(const ComponentId& id) const {
  return actors_.count(id) != 0;
}

Actor* Kernel::actor(const ComponentId& id) const {
  auto it = actors_.find(id);
  return it == actors_.end() ? nullptr : it->second.actor.get();
}

void Kernel::push_event(QueuedEvent ev) {
  ev.seq = next_seq_++;
  heap_.push_back(std::move(ev));
  std::push_heap(heap_.begin(), heap_.end(),
                 [](const QueuedEvent& a, const QueuedEvent& b) {
                   return a.at > b.at || (a.at == b.at && a.seq > b.seq);
                 });
}

void Kernel::schedule(VirtualTime at, Message msg) {
  if (at < now_) {
    raise(Err::PastEvent, "schedule at t=" + std::to_string(at) +
                              " before now=" + std::to_string(now_));
  }
  QueuedEvent ev;
  ev.at = at;
  ev.msg = std::move(msg);
  push_event(std::move(ev));
}

void Kernel::schedule_action(VirtualTime at, std::function<void(Kernel&)> action) {
  if (at < now_) raise(Err::PastEvent, "action scheduled in the past");
  QueuedEvent ev;
  ev.at = at;
  ev.is_action = true;
  ev.action = std::move(action);
  push_event(std::move(ev));
}

void Kernel::send(Message msg, VirtualTime latency) {
  if (!has_actor(msg.receiver)) {
    raise(Err::UnknownReceiver, "unknown receiver '" + msg.receiver + "'");
  }
  msg.sent_at = now_;
  if (msg.kind == MessageKind::Output) {
    msg.payload = apply_output_faults(msg.sender, now_, std::move(msg.payload));
  }
  VirtualTime extra = 0;
  for (const FaultSpec& f : faults_) {
    if (f.target != msg.receiver || !f.active_at(now_)) continue;
    if (const Delay* d = std::get_if<Delay>(&f.kind)) extra += d->extra_latency;
  }
  schedule(now_ + latency + extra, std::move(msg));
}

ValueList Kernel::apply_output_faults(const ComponentId& producer, VirtualTime at,
                                      ValueList payload) const {
  for (const FaultSpec& f : faults_) {
    if (f.target != producer || !f.active_at(at)) continue;
    if (const CorruptOutput* c = std::get_if<CorruptOutput>(&f.kind)) {
      if (c->channel < payload.size()) payload[c->channel] = c->replacement;
    }
  }
  return payload;
}

void Kernel::inject_fault(const FaultSpec& spec) {
  if (!has_actor(spec.target)) {
    raise(Err::UnknownTarget, "unknown fault target '" + spec.target + "'");
  }
  faults_.push_back(spec);
}

bool Kernel::is_down(const ComponentId& id) const {
  auto it = actors_.find(id);
  return it != actors_.end() && (it->second.crashed || it->second.restarting);
}

bool Kernel::is_hanging(const ComponentId& id, VirtualTime at) const {
  for (const FaultSpec& f : faults_) {
    if (f.target == id && f.active_at(at) && std::holds_alternative<Hang>(f.kind)) {
      return true;
    }
  }
  return false;
}

bool Kernel::restart_in_progress(const ComponentId& id) const {
  auto it = actors_.find(id);
  return it != actors_.end() && it->second.restarting;
}

void Kernel::begin_restart(const ComponentId& id, VirtualTime duration,
                           std::function<void(Kernel&, VirtualTime)> on_complete) {
  auto it = actors_.find(id);
  if (it == actors_.end()) raise(Err::UnknownTarget, "restart of unknown '" + id + "'");
  if (it->second.restarting) return;
  it->second.crashed = false;
  it->second.restarting = true;
  record(tag::kRestartBegin, "kernel", id, {static_cast<double>(duration)});
  schedule_action(now_ + duration, [id, cb = std::move(on_complete)](Kernel& k) {
    auto entry = k.actors_.find(id);
    if (entry == k.actors_.end()) return;
    entry->second.restarting = false;
    entry->second.actor->on_restart(k, k.now());
    k.record(tag::kRestartComplete, "kernel", id, {});
    if (cb) cb(k, k.now());
  });
}

void Kernel::set_delivery_filter(const ComponentId& receiver, FilterFn fn) {
  filters_[receiver] = std::move(fn);
}

void Kernel::clear_delivery_filter(const ComponentId& receiver) {
  filters_.erase(receiver);
}

void Kernel::add_observer(ObserverFn fn) { observers_.push_back(std::move(fn)); }

void Kernel::record(std::string kind, ComponentId sender, ComponentId receiver,
                    ValueList payload, bool is_test) {
  Record rec;
  rec.time = now_;
  rec.kind = std::move(kind);
  rec.sender = std::move(sender);
  rec.receiver = std::move(receiver);
  rec.is_test = is_test;
  rec.payload = std::move(payload);
  log_.append(std::move(rec));
}

void Kernel::apply_fault_edges() {
  for (const FaultSpec& f : faults_) {
    if (f.active_from == now_) {
      if (std::holds_alternative<Crash>(f.kind)) {
        actors_[f.target].crashed = true;
      }
      record(tag::kFaultOn, "kernel", f.target, {fault_kind_name(f.kind)});
    }
    if (f.active_until == now_ && !std::holds_alternative<Crash>(f.kind)) {
      record(tag::kFaultOff, "kernel", f.target, {fault_kind_name(f.kind)});
    }
    if (f.active_at(now_)) {
      if (const LeakGrowth* leak = std::get_if<LeakGrowth>(&f.kind)) {
        auto it = actors_.find(f.target);
        if (it != actors_.end() && !it->second.crashed && !it->second.restarting) {
          it->second.actor->grow_cases(leak->cases_per_tick);
        }
      }
    }
  }
}

void Kernel::deliver(QueuedEvent& ev) {
  if (ev.is_action) {
    ev.action(*this);
    return;
  }
  Message& msg = ev.msg;
  auto filt = filters_.find(msg.receiver);
  if (filt != filters_.end()) {
    if (std::optional<Redirect> r = filt->second(msg)) msg.receiver = r->to;
  }
  auto it = actors_.find(msg.receiver);
  if (it == actors_.end()) {
    raise(Err::UnknownReceiver, "delivery to unknown '" + msg.receiver + "'");
  }
  if (it->second.crashed || it->second.restarting) {
    Record rec;
    rec.time = now_;
    rec.kind = tag::kDrop;
    rec.sender = msg.sender;
    rec.receiver = msg.receiver;
    rec.is_test = msg.is_test;
    rec.payload = {kind_name(msg.kind)};
    log_.append(std::move(rec));
    return;
  }
  if (is_hanging(msg.receiver, now_)) {
    // Delivery is suspended until the hang window closes; relative order of
    // deferred messages is preserved by the seq tie-break.
    VirtualTime resume = now_;
    for (const FaultSpec& f : faults_) {
      if (f.target == msg.receiver && f.active_at(now_) &&
          std::holds_alternative<Hang>(f.kind)) {
        resume = std::max(resume, f.active_until);
      }
    }
    QueuedEvent requeued;
    requeued.at = resume;
    requeued.msg = std::move(msg);
    push_event(std::move(requeued));
    return;
  }
  Record rec;
  rec.time = now_;
  rec.kind = kind_name(msg.kind);
  rec.sender = msg.sender;
  rec.receiver = msg.receiver;
  rec.is_test = msg.is_test;
  rec.payload = msg.payload;
  rec.sent_at = msg.sent_at;
  log_.append(rec);
  for (ObserverFn& obs : observers_) obs(*this, msg, now_);
  it->second.actor->on_message(*this, msg);
}

void Kernel::process_tick() {
  apply_fault_edges();
  for (const ComponentId& id : tick_order_) {
    auto it = actors_.find(id);
    if (it == actors_.end()) continue;
    if (it->second.crashed || it->second.restarting) continue;
    if (is_hanging(id, now_)) continue;
    it->second.actor->on_tick(*this, now_);
  }
  while (!heap_.empty() && heap_.front().at <= now_) {
    std::pop_heap(heap_.begin(), heap_.end(),
                  [](const QueuedEvent& a, const QueuedEvent& b) {
                    return a.at > b.at || (a.at == b.at && a.seq > b.seq);
                  });
    QueuedEvent ev = std::move(heap_.back());
    heap_.pop_back();
    deliver(ev);
  }
}

const EventLog& Kernel::run_until(VirtualTime t_end) {
  if (t_end < now_) raise(Err::PastEvent, "run_until into the past");
  while (now_ < t_end) {
    process_tick();
    ++now_;
  }
  return log_;
}

}  // namespace vigil::sim
