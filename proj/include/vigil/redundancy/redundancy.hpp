#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "vigil/guardian/guardian.hpp"
#include "vigil/model/supervised_actor.hpp"
#include "vigil/sim/kernel.hpp"

namespace vigil::redundancy {

using sim::ComponentId;
using sim::Kernel;
using sim::Message;
using sim::VirtualTime;

enum class RedundancyMode { ActiveHot, PassiveCold, TMR, ReinitializedCopy };

const char* mode_name(RedundancyMode m);

struct RedundancyGroup {
  RedundancyMode mode = RedundancyMode::ActiveHot;
  std::vector<ComponentId> members;  // 2 for duplex modes, 3 for TMR
  double vote_tolerance = 0.0;
  VirtualTime sync_duration = 0;
  VirtualTime reinit_period = 0;                // ReinitializedCopy only
  std::vector<double> divergence_threshold;     // per channel

  void validate() const;
};

struct VoteResult {
  std::optional<ValueList> output;
  std::optional<std::size_t> dissenter;  // member index, when one disagrees with both peers
  bool failed = false;                   // no pair agrees on some channel
};

// 2-of-3 majority vote with per-channel tolerance: channels where all three
// agree within eps vote the median; otherwise the closest agreeing pair's
// midpoint wins and a member disagreeing with both peers is the dissenter.
// Permutation-invariant in the member order.
VoteResult tmr_vote(const ValueList& a, const ValueList& b, const ValueList& c,
                    double epsilon);

// Drives a redundancy group from bus inputs: members are stepped sequentially
// within the tick in member-list order, the arrangement's output is emitted
// to the sink, and anomalies are escalated as verdicts.
class RedundancyManager : public sim::Actor {
 public:
  RedundancyManager(ComponentId group_id, RedundancyGroup group, ComponentId sink,
                    std::optional<ComponentId> guardian = std::nullopt);

  const ComponentId& id() const { return group_id_; }
  const RedundancyGroup& group() const { return group_; }

  void on_message(Kernel& sim, const Message& msg) override;

 private:
  void duplex_step(Kernel& sim, const ValueList& inputs, VirtualTime now);
  void passive_step(Kernel& sim, const ValueList& inputs, VirtualTime now);
  void tmr_step(Kernel& sim, const ValueList& inputs, VirtualTime now);
  void reinit_copy_step(Kernel& sim, const ValueList& inputs, VirtualTime now);

  model::SupervisedActor* member_actor(Kernel& sim, std::size_t i) const;
  bool member_up(Kernel& sim, std::size_t i, VirtualTime now) const;
  std::optional<ValueList> step_member(Kernel& sim, std::size_t i,
                                       const ValueList& inputs, VirtualTime now,
                                       VirtualTime* latency = nullptr);
  void emit(Kernel& sim, const ComponentId& producer, ValueList outputs,
            VirtualTime latency);
  void escalate(Kernel& sim, guardian::Cause cause, const ComponentId& subject,
                ValueList extra = {});
  void forward_learn(Kernel& sim, const Message& msg);

  ComponentId group_id_;
  RedundancyGroup group_;
  ComponentId sink_;
  std::optional<ComponentId> guardian_;

  // PassiveCold bookkeeping
  std::optional<model::StateImage> checkpoint_;
  bool failover_started_ = false;
  bool standby_active_ = false;
  std::vector<ValueList> sync_buffer_;

  // ReinitializedCopy bookkeeping
  VirtualTime next_reinit_ = 0;
};

}  // namespace vigil::redundancy
