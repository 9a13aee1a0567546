#include "vigil/redundancy/redundancy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace vigil::redundancy {

const char* mode_name(RedundancyMode m) {
  switch (m) {
    case RedundancyMode::ActiveHot: return "active_hot";
    case RedundancyMode::PassiveCold: return "passive_cold";
    case RedundancyMode::TMR: return "tmr";
    case RedundancyMode::ReinitializedCopy: return "reinitialized_copy";
  }
  return "unknown";
}

void RedundancyGroup::validate() const {
  std::size_t expected = mode == RedundancyMode::TMR ? 3 : 2;
  if (members.size() != expected) {
    raise(Err::SchemaViolation, std::string("redundancy group of mode ") +
                                    mode_name(mode) + " needs " +
                                    std::to_string(expected) + " members");
  }
  std::set<ComponentId> distinct(members.begin(), members.end());
  if (distinct.size() != members.size()) {
    raise(Err::DuplicateMember, "redundancy group members must be pairwise distinct");
  }
  if (vote_tolerance < 0) {
    raise(Err::SchemaViolation, "vote tolerance must be >= 0");
  }
}

namespace {

double channel_distance(const Value& x, const Value& y) {
  if (is_num(x) && is_num(y)) return std::abs(num(x) - num(y));
  return x == y ? 0.0 : std::numeric_limits<double>::infinity();
}

Value channel_median(const Value& x, const Value& y, const Value& z) {
  if (is_num(x) && is_num(y) && is_num(z)) {
    double v[3] = {num(x), num(y), num(z)};
    std::sort(v, v + 3);
    return v[1];
  }
  // Symbolic channels agree only on equality, so at least two are identical.
  if (x == y || x == z) return x;
  return y;
}

Value channel_midpoint(const Value& x, const Value& y) {
  if (is_num(x) && is_num(y)) return (num(x) + num(y)) / 2.0;
  return x;
}

}  // namespace

VoteResult tmr_vote(const ValueList& a, const ValueList& b, const ValueList& c,
                    double epsilon) {
  if (a.size() != b.size() || b.size() != c.size()) {
    raise(Err::ArityMismatch, "tmr_vote: member outputs differ in arity");
  }
  VoteResult result;
  ValueList voted(a.size(), 0.0);
  bool disagrees_with_both[3] = {false, false, false};
  for (std::size_t ch = 0; ch < a.size(); ++ch) {
    const Value* v[3] = {&a[ch], &b[ch], &c[ch]};
    double dab = channel_distance(*v[0], *v[1]);
    double dac = channel_distance(*v[0], *v[2]);
    double dbc = channel_distance(*v[1], *v[2]);
    bool ab = dab <= epsilon, ac = dac <= epsilon, bc = dbc <= epsilon;
    if (ab && ac && bc) {
      voted[ch] = channel_median(*v[0], *v[1], *v[2]);
      continue;
    }
    if (!ab && !ac && !bc) {
      result.failed = true;
      return result;
    }
    struct Pair {
      double dist;
      Value mid;
      int excluded;
    };
    std::vector<Pair> agreeing;
    if (ab) agreeing.push_back({dab, channel_midpoint(*v[0], *v[1]), 2});
    if (ac) agreeing.push_back({dac, channel_midpoint(*v[0], *v[2]), 1});
    if (bc) agreeing.push_back({dbc, channel_midpoint(*v[1], *v[2]), 0});
    const Pair* best = &agreeing[0];
    for (const Pair& p : agreeing) {
      if (p.dist < best->dist ||
          (p.dist == best->dist && channel_distance(p.mid, best->mid) > 0 &&
           is_num(p.mid) && is_num(best->mid) && num(p.mid) < num(best->mid))) {
        best = &p;
      }
    }
    voted[ch] = best->mid;
    for (int m = 0; m < 3; ++m) {
      int peer1 = (m + 1) % 3, peer2 = (m + 2) % 3;
      double d1 = channel_distance(*v[m], *v[peer1]);
      double d2 = channel_distance(*v[m], *v[peer2]);
      if (d1 > epsilon && d2 > epsilon) disagrees_with_both[m] = true;
    }
  }
  result.output = std::move(voted);
  for (std::size_t m = 0; m < 3; ++m) {
    if (disagrees_with_both[m]) {
      result.dissenter = m;
      break;
    }
  }
  return result;
}

RedundancyManager::RedundancyManager(ComponentId group_id, RedundancyGroup group,
                                     ComponentId sink,
                                     std::optional<ComponentId> guardian)
    : group_id_(std::move(group_id)),
      group_(std::move(group)),
      sink_(std::move(sink)),
      guardian_(std::move(guardian)) {
  group_.validate();
}

model::SupervisedActor* RedundancyManager::member_actor(Kernel& sim,
                                                        std::size_t i) const {
  return dynamic_cast<model::SupervisedActor*>(sim.actor(group_.members[i]));
}

bool RedundancyManager::member_up(Kernel& sim, std::size_t i, VirtualTime now) const {
  const ComponentId& id = group_.members[i];
  return !sim.is_down(id) && !sim.is_hanging(id, now) && member_actor(sim, i) != nullptr;
}

std::optional<ValueList> RedundancyManager::step_member(Kernel& sim, std::size_t i,
                                                        const ValueList& inputs,
                                                        VirtualTime now,
                                                        VirtualTime* latency) {
  if (!member_up(sim, i, now)) return std::nullopt;
  model::Component::StepResult result =
      member_actor(sim, i)->direct_step(sim, inputs, now);
  if (latency != nullptr) *latency = result.latency;
  return sim.apply_output_faults(group_.members[i], now, std::move(result.outputs));
}

void RedundancyManager::emit(Kernel& sim, const ComponentId& producer,
                             ValueList outputs, VirtualTime latency) {
  sim.send(make_message(producer, sink_, sim::MessageKind::Output, std::move(outputs)),
           latency);
}

void RedundancyManager::escalate(Kernel& sim, guardian::Cause cause,
                                 const ComponentId& subject, ValueList extra) {
  guardian::Verdict v{subject, guardian::VerdictKind::Defect, cause, sim.now()};
  guardian::record_verdict(sim, v, group_id_, std::move(extra));
  if (guardian_) {
    sim.send(make_message(group_id_, *guardian_, sim::MessageKind::Control,
                          {std::string("escalation"), std::string(cause_name(cause)),
                           subject}),
             1);
  }
}

void RedundancyManager::forward_learn(Kernel& sim, const Message& msg) {
  for (std::size_t i = 0; i < group_.members.size(); ++i) {
    if (group_.mode == RedundancyMode::PassiveCold && i == 1 && !standby_active_) {
      continue;  // the cold standby learns nothing until it takes over
    }
    if (model::SupervisedActor* actor = member_actor(sim, i)) {
      actor->component().learn(ValueList(msg.payload.begin() + 1, msg.payload.end()));
    }
  }
}

void RedundancyManager::duplex_step(Kernel& sim, const ValueList& inputs,
                                    VirtualTime now) {
  VirtualTime lat_primary = 0, lat_standby = 0;
  std::optional<ValueList> primary = step_member(sim, 0, inputs, now, &lat_primary);
  std::optional<ValueList> standby = step_member(sim, 1, inputs, now, &lat_standby);
  if (primary) {
    emit(sim, group_.members[0], std::move(*primary), lat_primary);
  } else if (standby) {
    // Hot standby: switchover the same tick, zero output gap.
    emit(sim, group_.members[1], std::move(*standby), lat_standby);
  } else {
    escalate(sim, guardian::Cause::BothFailed, group_id_);
  }
}

void RedundancyManager::passive_step(Kernel& sim, const ValueList& inputs,
                                     VirtualTime now) {
  if (standby_active_) {
    VirtualTime latency = 0;
    if (std::optional<ValueList> out = step_member(sim, 1, inputs, now, &latency)) {
      checkpoint_ = member_actor(sim, 1)->component().snapshot();
      emit(sim, group_.members[1], std::move(*out), latency);
    } else {
      escalate(sim, guardian::Cause::BothFailed, group_id_);
    }
    return;
  }
  if (member_up(sim, 0, now)) {
    VirtualTime latency = 0;
    std::optional<ValueList> out = step_member(sim, 0, inputs, now, &latency);
    if (out) {
      checkpoint_ = member_actor(sim, 0)->component().snapshot();
      emit(sim, group_.members[0], std::move(*out), latency);
    }
    return;
  }
  // Primary declared failed: start the synchronization phase once, buffer
  // inputs meanwhile, and bring the standby up from the last good image.
  if (!failover_started_) {
    failover_started_ = true;
    sim.record(sim::tag::kSyncBegin, group_id_, group_.members[1],
               {static_cast<double>(group_.sync_duration)});
    sim.schedule_action(now + group_.sync_duration, [this](Kernel& k) {
      model::SupervisedActor* standby = member_actor(k, 1);
      if (standby == nullptr || !member_up(k, 1, k.now())) {
        escalate(k, guardian::Cause::BothFailed, group_id_,
                 {std::string("no_standby")});
        return;
      }
      if (checkpoint_) {
        standby->component().restore(*checkpoint_);
      } else {
        standby->component().reinitialize();
      }
      standby_active_ = true;
      k.record(sim::tag::kTakeover, group_id_, group_.members[1],
               {static_cast<double>(sync_buffer_.size())});
      // Replay what arrived during sync; the response to the newest buffered
      // input goes out immediately so the takeover closes the gap exactly.
      for (std::size_t i = 0; i < sync_buffer_.size(); ++i) {
        model::Component::StepResult result =
            standby->component().step(sync_buffer_[i], k.now());
        if (i + 1 == sync_buffer_.size()) {
          ValueList patched = k.apply_output_faults(group_.members[1], k.now(),
                                                    std::move(result.outputs));
          emit(k, group_.members[1], std::move(patched), 0);
        }
      }
      sync_buffer_.clear();
    });
  }
  sync_buffer_.push_back(inputs);
}

void RedundancyManager::tmr_step(Kernel& sim, const ValueList& inputs,
                                 VirtualTime now) {
  std::array<std::optional<ValueList>, 3> outs;
  VirtualTime latency = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    VirtualTime lat = 0;
    outs[i] = step_member(sim, i, inputs, now, &lat);
    latency = std::max(latency, lat);
  }
  std::vector<std::size_t> up;
  for (std::size_t i = 0; i < 3; ++i) {
    if (outs[i]) up.push_back(i);
  }
  if (up.size() == 3) {
    VoteResult vote = tmr_vote(*outs[0], *outs[1], *outs[2], group_.vote_tolerance);
    if (vote.failed) {
      escalate(sim, guardian::Cause::VoteFailure, group_id_);
      return;
    }
    if (vote.dissenter) {
      escalate(sim, guardian::Cause::VoteDissent, group_.members[*vote.dissenter]);
    }
    emit(sim, group_id_, std::move(*vote.output), latency);
    return;
  }
  if (up.size() == 2) {
    const ValueList& x = *outs[up[0]];
    const ValueList& y = *outs[up[1]];
    if (x.size() != y.size()) {
      raise(Err::ArityMismatch, "tmr members disagree in arity");
    }
    ValueList voted(x.size(), 0.0);
    for (std::size_t ch = 0; ch < x.size(); ++ch) {
      if (channel_distance(x[ch], y[ch]) > group_.vote_tolerance) {
        escalate(sim, guardian::Cause::VoteFailure, group_id_);
        return;
      }
      voted[ch] = channel_midpoint(x[ch], y[ch]);
    }
    emit(sim, group_id_, std::move(voted), latency);
    return;
  }
  escalate(sim, guardian::Cause::VoteFailure, group_id_,
           {static_cast<double>(up.size())});
}

void RedundancyManager::reinit_copy_step(Kernel& sim, const ValueList& inputs,
                                         VirtualTime now) {
  model::SupervisedActor* copy = member_actor(sim, 1);
  if (copy != nullptr && now >= next_reinit_) {
    copy->component().reinitialize();
    next_reinit_ = now + std::max<VirtualTime>(group_.reinit_period, 1);
  }
  VirtualTime latency = 0;
  std::optional<ValueList> primary = step_member(sim, 0, inputs, now, &latency);
  std::optional<ValueList> reference = step_member(sim, 1, inputs, now);
  if (!primary) return;
  if (reference && primary->size() == reference->size()) {
    for (std::size_t ch = 0; ch < primary->size(); ++ch) {
      double div = channel_distance((*primary)[ch], (*reference)[ch]);
      double threshold = ch < group_.divergence_threshold.size()
                             ? group_.divergence_threshold[ch]
                             : std::numeric_limits<double>::infinity();
      if (div > threshold) {
        escalate(sim, guardian::Cause::DivergenceExceeded, group_.members[0],
                 {static_cast<double>(ch), div});
      }
    }
  }
  emit(sim, group_.members[0], std::move(*primary), latency);
}

void RedundancyManager::on_message(Kernel& sim, const Message& msg) {
  if (msg.kind == sim::MessageKind::Control) {
    if (!msg.payload.empty() && std::holds_alternative<std::string>(msg.payload[0]) &&
        str(msg.payload[0]) == "learn") {
      forward_learn(sim, msg);
    }
    return;
  }
  if (msg.kind != sim::MessageKind::Input) return;
  switch (group_.mode) {
    case RedundancyMode::ActiveHot:
      duplex_step(sim, msg.payload, sim.now());
      break;
    case RedundancyMode::PassiveCold:
      passive_step(sim, msg.payload, sim.now());
      break;
    case RedundancyMode::TMR:
      tmr_step(sim, msg.payload, sim.now());
      break;
    case RedundancyMode::ReinitializedCopy:
      reinit_copy_step(sim, msg.payload, sim.now());
      break;
  }
}

}  // namespace vigil::redundancy
