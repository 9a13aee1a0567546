#include "vigil/demo/overtake.hpp"

#include <algorithm>
#include <cmath>

namespace vigil::demo {

const char* phase_name(ManeuverPhase p) {
  switch (p) {
    case ManeuverPhase::FollowLane: return "follow_lane";
    case ManeuverPhase::PullOut: return "pull_out";
    case ManeuverPhase::Pass: return "pass";
    case ManeuverPhase::PullIn: return "pull_in";
  }
  return "unknown";
}

double phase_code(ManeuverPhase p) { return static_cast<double>(static_cast<int>(p)); }

ValueList TrafficSnapshot::to_values() const {
  return {ego_speed,
          lead_gap,
          lead_speed,
          adjacent_occupied ? 1.0 : 0.0,
          rear_gap,
          rear_closing_speed};
}

TrafficSnapshot TrafficSnapshot::from_values(const ValueList& v, VirtualTime t) {
  TrafficSnapshot s;
  if (v.size() >= 6) {
    s.ego_speed = num(v[0]);
    s.lead_gap = num(v[1]);
    s.lead_speed = num(v[2]);
    s.adjacent_occupied = num(v[3]) != 0.0;
    s.rear_gap = num(v[4]);
    s.rear_closing_speed = num(v[5]);
  }
  s.t = t;
  return s;
}

std::vector<std::string> overtake_decision_points() {
  return {points::kAdjacentFree,  points::kRearClearance,  points::kGainingOnLead,
          points::kHeadwayDesire, points::kStreakGate,     points::kPullOutHold,
          points::kPullOutComplete, points::kPassHold,     points::kPassCleared,
          points::kPullInComplete};
}

double compute_dt(const TrafficSnapshot& s, const DecisionParams& p) {
  return p.dt_base + p.dt_speed_coeff * s.ego_speed;
}

namespace {

// Conjunct-level evaluation with short-circuit instrumentation; the public
// precondition() is this with the collector dropped.
bool precondition_impl(const TrafficSnapshot& s, double dt_s, const DecisionParams& p,
                       std::vector<std::string>* hits) {
  (void)p;
  if (hits) hits->push_back(points::kAdjacentFree);
  if (s.adjacent_occupied) return false;
  if (hits) hits->push_back(points::kRearClearance);
  if (s.rear_closing_speed > 0 && s.rear_gap / s.rear_closing_speed <= dt_s) {
    return false;
  }
  if (hits) hits->push_back(points::kGainingOnLead);
  return s.ego_speed > s.lead_speed;
}

int trailing_true_preconditions(std::span<const TrafficSnapshot> history,
                                const DecisionParams& p, int needed) {
  int streak = 0;
  for (auto it = history.rbegin(); it != history.rend() && streak < needed; ++it) {
    if (!precondition_impl(*it, compute_dt(*it, p), p, nullptr)) break;
    ++streak;
  }
  return streak;
}

}  // namespace

bool precondition(const TrafficSnapshot& s, double dt_s, const DecisionParams& p) {
  return precondition_impl(s, dt_s, p, nullptr);
}

std::pair<ManeuverPhase, DecisionRecord> decide(std::span<const TrafficSnapshot> history,
                                                const DecisionParams& params,
                                                ManeuverState& state) {
  if (history.empty()) {
    raise(Err::UnorderedHistory, "decide: empty history");
  }
  for (std::size_t i = 1; i < history.size(); ++i) {
    if (history[i].t <= history[i - 1].t) {
      raise(Err::UnorderedHistory, "decide: history not strictly ordered by time");
    }
  }
  const TrafficSnapshot& s = history.back();
  double dt_s = compute_dt(s, params);

  DecisionRecord rec;
  rec.from = state.phase;
  bool pre = precondition_impl(s, dt_s, params, &rec.hits);

  switch (state.phase) {
    case ManeuverPhase::FollowLane: {
      rec.hits.push_back(points::kHeadwayDesire);
      bool desire = s.ego_speed > 0 &&
                    s.lead_gap / s.ego_speed < params.min_time_gap.value;
      if (desire) {
        rec.hits.push_back(points::kStreakGate);
        int streak = trailing_true_preconditions(history, params,
                                                 params.consecutive_required);
        if (streak >= params.consecutive_required) {
          state.phase = ManeuverPhase::PullOut;
          state.samples_in_phase = 0;
          state.pass_progress_m = 0;
          rec.initiated = true;
        }
      }
      break;
    }
    case ManeuverPhase::PullOut: {
      rec.hits.push_back(points::kPullOutHold);
      if (!pre) {
        state.phase = ManeuverPhase::FollowLane;
        state.samples_in_phase = 0;
        rec.aborted = true;
        break;
      }
      rec.hits.push_back(points::kPullOutComplete);
      if (++state.samples_in_phase >= params.lane_change_samples) {
        state.phase = ManeuverPhase::Pass;
        state.samples_in_phase = 0;
      }
      break;
    }
    case ManeuverPhase::Pass: {
      rec.hits.push_back(points::kPassHold);
      if (!pre) {
        state.phase = ManeuverPhase::FollowLane;
        state.samples_in_phase = 0;
        rec.aborted = true;
        break;
      }
      rec.hits.push_back(points::kPassCleared);
      state.pass_progress_m +=
          std::max(0.0, s.ego_speed - s.lead_speed) * params.sample_dt_s;
      if (state.pass_progress_m >= params.pass_clearance_m) {
        state.phase = ManeuverPhase::PullIn;
        state.samples_in_phase = 0;
      }
      break;
    }
    case ManeuverPhase::PullIn: {
      rec.hits.push_back(points::kPullInComplete);
      if (++state.samples_in_phase >= params.lane_change_samples) {
        state.phase = ManeuverPhase::FollowLane;
        state.samples_in_phase = 0;
        rec.completed = true;
      }
      break;
    }
  }
  rec.to = state.phase;
  return {state.phase, rec};
}

OvertakeDecider::OvertakeDecider(DecisionParams params, model::StepCostModel cost,
                                 std::optional<model::CaseBase> case_base)
    : Component(kTypeName, cost), config_(std::move(params)) {
  this->params().add_scalar(config_.min_time_gap);
  if (case_base) this->params().attach_case_base(std::move(*case_base));
}

std::vector<std::string> OvertakeDecider::decision_points() const {
  return overtake_decision_points();
}

void OvertakeDecider::learn_comfort(double feedback) {
  learn({feedback});
}

ValueList OvertakeDecider::do_step(const ValueList& inputs, VirtualTime now) {
  TrafficSnapshot s = TrafficSnapshot::from_values(inputs, now);
  if (!history_.empty() && history_.back().t >= s.t) {
    // Probe traffic replays the current tick; keep the history ordered by
    // giving the sandboxed sample a nominal forward offset.
    s.t = history_.back().t + 1;
  }
  history_.push_back(s);
  while (history_.size() > 16) history_.pop_front();

  config_.min_time_gap.value = params().find("min_time_gap")->value;
  std::vector<TrafficSnapshot> ordered(history_.begin(), history_.end());
  auto [phase, rec] = decide(ordered, config_, state_);
  for (const std::string& point : rec.hits) hit(point.c_str());

  if (rec.completed && learning_on() && params().case_base()) {
    params().case_base()->add({{s.ego_speed, s.lead_gap, s.lead_speed}, 1.0});
  }
  return {phase_code(phase), params().find("min_time_gap")->value};
}

void OvertakeDecider::do_learn(const ValueList& observation) {
  if (observation.empty() || !is_num(observation[0])) return;
  model::ScalarParam* p = params().find("min_time_gap");
  p->value += config_.learn_step * num(observation[0]);
}

void OvertakeDecider::do_reinitialize() {
  state_ = ManeuverState{};
  history_.clear();
}

Json OvertakeDecider::extra_state() const {
  Json j;
  j["phase"] = static_cast<int>(state_.phase);
  j["samples_in_phase"] = state_.samples_in_phase;
  j["pass_progress_m"] = state_.pass_progress_m;
  Json hist = Json::array();
  for (const TrafficSnapshot& s : history_) {
    hist.push_back({{"t", s.t}, {"v", to_json(s.to_values())}});
  }
  j["history"] = hist;
  return j;
}

void OvertakeDecider::restore_extra(const Json& j) {
  state_.phase = static_cast<ManeuverPhase>(j.at("phase").get<int>());
  state_.samples_in_phase = j.at("samples_in_phase").get<int>();
  state_.pass_progress_m = j.at("pass_progress_m").get<double>();
  history_.clear();
  for (const Json& h : j.at("history")) {
    history_.push_back(TrafficSnapshot::from_values(
        value_list_from_json(h.at("v")), h.at("t").get<VirtualTime>()));
  }
}

FallbackKeeper::FallbackKeeper(model::StepCostModel cost)
    : Component(kTypeName, cost) {
  params().set_learning_enabled(false);
}

ValueList FallbackKeeper::do_step(const ValueList& inputs, VirtualTime now) {
  (void)now;
  TrafficSnapshot s = TrafficSnapshot::from_values(inputs, 0);
  return {phase_code(fallback_decide(s)), kSafeHeadwayS};
}

ManeuverPhase fallback_decide(const TrafficSnapshot& s) {
  (void)s;
  return ManeuverPhase::FollowLane;
}

TrafficSnapshot sample_world(const TrafficGenSpec& spec, VirtualTime t, sim::Rng* rng) {
  double t_s = static_cast<double>(t) / 1000.0;
  TrafficSnapshot s;
  s.t = t;
  s.ego_speed = spec.ego_speed;
  s.lead_speed = spec.lead_speed;
  s.lead_gap = std::max(spec.min_gap,
                        spec.lead_gap0 + (spec.lead_speed - spec.ego_speed) * t_s);
  for (const auto& [from, until] : spec.occupied_windows) {
    if (t >= from && t < until) s.adjacent_occupied = true;
  }
  if (spec.rear_gap0 >= 0) {
    s.rear_gap = std::max(0.0, spec.rear_gap0 - spec.rear_closing * t_s);
    s.rear_closing_speed = spec.rear_closing;
  } else {
    s.rear_gap = 1e9;
    s.rear_closing_speed = 0.0;
  }
  if (rng != nullptr && spec.noise > 0) {
    s.lead_gap = std::max(spec.min_gap,
                          s.lead_gap + rng->uniform_real(-spec.noise, spec.noise));
    if (spec.rear_gap0 >= 0) {
      s.rear_gap = std::max(0.0, s.rear_gap + rng->uniform_real(-spec.noise, spec.noise));
    }
  }
  return s;
}

guardian::Plausibility demo_plausibility(const std::string& name) {
  if (name == "no_pullout_when_occupied") {
    // An overtake must never begin while the adjacent lane is occupied in
    // the newest observed snapshot.
    return [](const std::deque<ValueList>& window, const ValueList& output) {
      if (output.empty() || !is_num(output[0])) return true;
      if (num(output[0]) != phase_code(ManeuverPhase::PullOut)) return true;
      if (window.empty()) return true;
      const ValueList& last = window.back();
      return last.size() < 4 || num(last[3]) == 0.0;
    };
  }
  if (name == "always_true") {
    return [](const std::deque<ValueList>&, const ValueList&) { return true; };
  }
  if (name == "reject_empty_window") {
    return [](const std::deque<ValueList>& window, const ValueList&) {
      return !window.empty();
    };
  }
  raise(Err::SchemaViolation, "unknown plausibility predicate '" + name + "'");
}

}  // namespace vigil::demo
