#include "vigil/testkit/patterns.hpp"

#include <algorithm>
#include <set>

namespace vigil::testkit {

bool Trace::ever(demo::ManeuverPhase p) const {
  return std::any_of(steps.begin(), steps.end(),
                     [p](const Step& s) { return s.phase == p; });
}

bool Trace::completed_cycle() const {
  int stage = 0;  // 0: want PullOut, 1: want Pass, 2: want PullIn
  for (const Step& s : steps) {
    if (stage == 0 && s.phase == demo::ManeuverPhase::PullOut) stage = 1;
    else if (stage == 1 && s.phase == demo::ManeuverPhase::Pass) stage = 2;
    else if (stage == 2 && s.phase == demo::ManeuverPhase::PullIn) return true;
  }
  return false;
}

Trace extract_trace(const sim::EventLog& log) {
  Trace trace;
  std::string sink = "actuation";
  for (const sim::Record& rec : log.records()) {
    if (rec.kind == sim::tag::kMeta && rec.payload.size() >= 2 &&
        str(rec.payload[0]) == "sink") {
      sink = str(rec.payload[1]);
    }
  }
  for (const sim::Record& rec : log.records()) {
    if (rec.kind == kind_name(sim::MessageKind::Output) && !rec.is_test &&
        rec.receiver == sink && !rec.payload.empty() && is_num(rec.payload[0])) {
      Trace::Step step;
      step.t = rec.time;
      step.phase = static_cast<demo::ManeuverPhase>(static_cast<int>(num(rec.payload[0])));
      step.output = rec.payload;
      trace.steps.push_back(std::move(step));
    }
    if (rec.kind == kind_name(sim::MessageKind::Input) &&
        rec.sender == scenario::kSourceId) {
      trace.inputs.push_back(demo::TrafficSnapshot::from_values(rec.payload, rec.time));
    }
  }
  return trace;
}

std::string classify_trace(const Trace& trace,
                           const std::vector<BehaviorPatternClass>& classes) {
  for (const BehaviorPatternClass& cls : classes) {
    if (cls.matches(trace)) return cls.name;
  }
  return kUnclassified;
}

namespace {

bool all_follow_lane(const Trace& t) {
  return !t.steps.empty() &&
         std::all_of(t.steps.begin(), t.steps.end(), [](const Trace::Step& s) {
           return s.phase == demo::ManeuverPhase::FollowLane;
         });
}

bool blocked_moment(const demo::TrafficSnapshot& s) {
  demo::DecisionParams defaults;
  double dt = demo::compute_dt(s, defaults);
  bool rear_blocks = s.rear_closing_speed > 0 && s.rear_gap / s.rear_closing_speed <= dt;
  return (s.adjacent_occupied || rear_blocks) && s.ego_speed > s.lead_speed;
}

// Time (ms) at which the default comfort threshold starts demanding an
// overtake against a slower lead, under the open-loop kinematics.
sim::VirtualTime desire_onset_ms(double gap0, double ego, double lead) {
  double threshold_gap = ego * 1.5;
  if (gap0 <= threshold_gap || ego <= lead) return 0;
  return static_cast<sim::VirtualTime>((gap0 - threshold_gap) / (ego - lead) * 1000.0);
}

}  // namespace

std::vector<BehaviorPatternClass> demo_pattern_classes() {
  std::vector<BehaviorPatternClass> classes;

  BehaviorPatternClass completed;
  completed.name = "completed-overtake";
  completed.expected_outcome = "pull_out,pass,pull_in";
  completed.matches = [](const Trace& t) { return t.completed_cycle(); };
  completed.sample_template = [](sim::Rng& rng) {
    demo::TrafficGenSpec spec;
    spec.ego_speed = 30.0;
    spec.lead_speed = rng.uniform_real(22.0, 26.0);
    spec.lead_gap0 = rng.uniform_real(60.0, 100.0);
    return spec;
  };
  classes.push_back(std::move(completed));

  BehaviorPatternClass aborted;
  aborted.name = "aborted-overtake";
  aborted.expected_outcome = "pull_out,abort";
  aborted.matches = [](const Trace& t) {
    return t.ever(demo::ManeuverPhase::PullOut) && !t.completed_cycle();
  };
  aborted.sample_template = [](sim::Rng& rng) {
    demo::TrafficGenSpec spec;
    spec.ego_speed = 30.0;
    spec.lead_speed = rng.uniform_real(23.0, 25.0);
    spec.lead_gap0 = rng.uniform_real(70.0, 90.0);
    // The adjacent lane fills shortly after the maneuver begins and stays
    // occupied, so the attempt aborts and cannot be retried.
    sim::VirtualTime onset = desire_onset_ms(spec.lead_gap0, spec.ego_speed,
                                             spec.lead_speed);
    spec.occupied_windows = {{onset + 700, 1000000}};
    return spec;
  };
  classes.push_back(std::move(aborted));

  BehaviorPatternClass blocked;
  blocked.name = "blocked-overtake";
  blocked.expected_outcome = "follow_lane";
  blocked.matches = [](const Trace& t) {
    return all_follow_lane(t) &&
           std::any_of(t.inputs.begin(), t.inputs.end(), blocked_moment);
  };
  blocked.sample_template = [](sim::Rng& rng) {
    demo::TrafficGenSpec spec;
    spec.ego_speed = 30.0;
    spec.lead_speed = rng.uniform_real(23.0, 25.0);
    spec.lead_gap0 = rng.uniform_real(70.0, 90.0);
    spec.rear_gap0 = rng.uniform_real(40.0, 60.0);
    spec.rear_closing = rng.uniform_real(7.0, 10.0);
    return spec;
  };
  classes.push_back(std::move(blocked));

  BehaviorPatternClass none;
  none.name = "no-overtake";
  none.expected_outcome = "follow_lane";
  none.overlaps_with = {"blocked-overtake"};
  none.matches = all_follow_lane;
  none.sample_template = [](sim::Rng& rng) {
    demo::TrafficGenSpec spec;
    spec.ego_speed = 30.0;
    spec.lead_speed = rng.uniform_real(30.0, 36.0);
    spec.lead_gap0 = rng.uniform_real(150.0, 250.0);
    return spec;
  };
  classes.push_back(std::move(none));

  return classes;
}

std::vector<sim::ComponentId> identify_adaptive(const scenario::Runtime& rt) {
  std::vector<sim::ComponentId> adaptive;
  for (const auto& [id, comp] : rt.components) {
    const model::ParameterStore& store = comp->params();
    if (store.learning_enabled() || store.case_base().has_value()) {
      adaptive.push_back(id);
    }
  }
  return adaptive;
}

GeneratedSuite generate_tests(const std::vector<BehaviorPatternClass>& classes,
                              std::size_t budget, const scenario::Scenario& base,
                              std::uint64_t seed) {
  if (budget < classes.size()) {
    raise(Err::InsufficientBudget,
          "generate_tests: budget " + std::to_string(budget) + " below class count " +
              std::to_string(classes.size()));
  }
  sim::Rng rng(seed);
  GeneratedSuite suite;
  std::set<std::string> matched;
  for (std::size_t i = 0; i < budget; ++i) {
    const BehaviorPatternClass& cls = classes[i % classes.size()];
    scenario::Scenario s = base;
    s.traffic.generator = cls.sample_template(rng);
    s.traffic.trace.clear();
    s.seed = rng.next_u64();
    scenario::RunOutput out = scenario::run_scenario(s);
    Trace trace = extract_trace(out.log);
    if (classify_trace(trace, classes) == cls.name) matched.insert(cls.name);
    suite.scenarios.push_back({std::move(s), cls.name});
  }
  for (const BehaviorPatternClass& cls : classes) {
    if (!matched.count(cls.name)) suite.unmatched_classes.push_back(cls.name);
  }
  return suite;
}

}  // namespace vigil::testkit
