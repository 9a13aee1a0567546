#pragma once

#include <deque>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vigil/guardian/guardian.hpp"
#include "vigil/model/component.hpp"
#include "vigil/sim/rng.hpp"

namespace vigil::demo {

using sim::VirtualTime;

// Decision-level view of the traffic around the ego vehicle. rear_gap and
// rear_closing_speed describe the first vehicle behind the ego on the
// adjacent lane (closing speed positive when it approaches).
struct TrafficSnapshot {
  double ego_speed = 0;        // m/s
  double lead_gap = 0;         // m
  double lead_speed = 0;       // m/s
  bool adjacent_occupied = false;
  double rear_gap = 0;         // m
  double rear_closing_speed = 0;  // m/s
  VirtualTime t = 0;

  ValueList to_values() const;
  static TrafficSnapshot from_values(const ValueList& v, VirtualTime t);
};

struct DecisionParams {
  model::ScalarParam min_time_gap{"min_time_gap", 1.5, 0.8, 3.0};  // s, adaptive
  double dt_base = 2.0;          // s
  double dt_speed_coeff = 0.05;  // s per (m/s)
  int consecutive_required = 3;
  double learn_step = 0.1;       // s per unit of comfort feedback
  int lane_change_samples = 2;
  double pass_clearance_m = 15.0;
  double sample_dt_s = 0.1;
};

enum class ManeuverPhase { FollowLane = 0, PullOut = 1, Pass = 2, PullIn = 3 };

const char* phase_name(ManeuverPhase p);
double phase_code(ManeuverPhase p);

// Instrumented decision points of the demo component.
namespace points {
inline constexpr const char* kAdjacentFree = "precond.adjacent_free";
inline constexpr const char* kRearClearance = "precond.rear_clearance";
inline constexpr const char* kGainingOnLead = "precond.gaining_on_lead";
inline constexpr const char* kHeadwayDesire = "decide.headway_desire";
inline constexpr const char* kStreakGate = "decide.streak_gate";
inline constexpr const char* kPullOutHold = "decide.pullout_hold";
inline constexpr const char* kPullOutComplete = "decide.pullout_complete";
inline constexpr const char* kPassHold = "decide.pass_hold";
inline constexpr const char* kPassCleared = "decide.pass_cleared";
inline constexpr const char* kPullInComplete = "decide.pullin_complete";
}  // namespace points

std::vector<std::string> overtake_decision_points();

// Situation-dependent window: the rear vehicle must not be able to reach the
// ego's position within this many seconds.
double compute_dt(const TrafficSnapshot& s, const DecisionParams& p);

// Adjacent lane free, rear vehicle cannot reach the ego within dt under
// constant-velocity extrapolation, and the ego gains on the lead.
bool precondition(const TrafficSnapshot& s, double dt_s, const DecisionParams& p);

struct ManeuverState {
  ManeuverPhase phase = ManeuverPhase::FollowLane;
  int samples_in_phase = 0;
  double pass_progress_m = 0;
};

struct DecisionRecord {
  ManeuverPhase from = ManeuverPhase::FollowLane;
  ManeuverPhase to = ManeuverPhase::FollowLane;
  bool initiated = false;
  bool aborted = false;
  bool completed = false;
  std::vector<std::string> hits;
};

// One decision step over the trailing history (ordered by time, newest last).
// PullOut is initiated only when the precondition held at the last
// consecutive_required samples and the headway has fallen below the learned
// comfort threshold. Collapsing preconditions abort PullOut/Pass back to
// FollowLane; PullIn is committed.
std::pair<ManeuverPhase, DecisionRecord> decide(
    std::span<const TrafficSnapshot> history, const DecisionParams& params,
    ManeuverState& state);

// The adaptive overtaking decision function. Outputs per step:
// channel 0 = maneuver phase code, channel 1 = current comfort threshold.
class OvertakeDecider : public model::Component {
 public:
  static constexpr const char* kTypeName = "overtake_decider";

  OvertakeDecider(DecisionParams params, model::StepCostModel cost,
                  std::optional<model::CaseBase> case_base = std::nullopt);

  std::vector<std::string> decision_points() const override;
  const ManeuverState& maneuver_state() const { return state_; }
  const DecisionParams& decision_params() const { return config_; }

  // Comfort feedback: positive feedback nudges the learned threshold up,
  // negative down. Deliberately unclamped; the range monitor owns the bounds.
  void learn_comfort(double feedback);

 protected:
  ValueList do_step(const ValueList& inputs, VirtualTime now) override;
  void do_learn(const ValueList& observation) override;
  void do_reinitialize() override;
  Json extra_state() const override;
  void restore_extra(const Json& j) override;

 private:
  DecisionParams config_;
  ManeuverState state_;
  std::deque<TrafficSnapshot> history_;
};

// Design-diverse degraded fallback: stateless, static thresholds, no adaptive
// parts. Never initiates an overtake.
class FallbackKeeper : public model::Component {
 public:
  static constexpr const char* kTypeName = "fallback_keeper";
  static constexpr double kSafeHeadwayS = 2.0;

  explicit FallbackKeeper(model::StepCostModel cost = {1, 0});

 protected:
  ValueList do_step(const ValueList& inputs, VirtualTime now) override;
};

ManeuverPhase fallback_decide(const TrafficSnapshot& s);

// Open-loop kinematic traffic for scenario generation: a slower lead ahead,
// an optional closing rear vehicle on the adjacent lane, and scripted
// occupancy windows.
struct TrafficGenSpec {
  double ego_speed = 30.0;
  double lead_gap0 = 150.0;
  double lead_speed = 24.0;
  double rear_gap0 = -1.0;  // < 0 means no rear vehicle
  double rear_closing = 0.0;
  std::vector<std::pair<VirtualTime, VirtualTime>> occupied_windows;
  double noise = 0.0;
  double min_gap = 0.5;
};

TrafficSnapshot sample_world(const TrafficGenSpec& spec, VirtualTime t, sim::Rng* rng);

// Watchdog predicates shipped with the demo, by name.
guardian::Plausibility demo_plausibility(const std::string& name);

}  // namespace vigil::demo
