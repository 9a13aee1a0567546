#pragma once

#include <functional>
#include <string>
#include <vector>

#include "vigil/demo/overtake.hpp"
#include "vigil/scenario/runtime.hpp"
#include "vigil/sim/event_log.hpp"

namespace vigil::testkit {

inline constexpr const char* kUnclassified = "Unclassified";

// A run of the demo function as seen at the system boundary: the functional
// output steps plus the input snapshots that drove them.
struct Trace {
  struct Step {
    sim::VirtualTime t = 0;
    demo::ManeuverPhase phase = demo::ManeuverPhase::FollowLane;
    ValueList output;
  };
  std::vector<Step> steps;
  std::vector<demo::TrafficSnapshot> inputs;

  bool ever(demo::ManeuverPhase p) const;
  bool completed_cycle() const;  // PullOut .. Pass .. PullIn in order
};

Trace extract_trace(const sim::EventLog& log);

// A recurring behavior pattern a decision is based on: a decidable predicate
// over finite traces plus a scenario template that should produce it.
struct BehaviorPatternClass {
  std::string name;
  std::function<bool(const Trace&)> matches;
  std::string expected_outcome;
  std::vector<std::string> overlaps_with;  // declared overlaps; order decides
  std::function<demo::TrafficGenSpec(sim::Rng&)> sample_template;
};

std::vector<BehaviorPatternClass> demo_pattern_classes();

// First matching class in suite order, or Unclassified (a coverage gap).
std::string classify_trace(const Trace& trace,
                           const std::vector<BehaviorPatternClass>& classes);

// Exactly the components whose ParameterStore learns: learning enabled or a
// case base attached.
std::vector<sim::ComponentId> identify_adaptive(const scenario::Runtime& rt);

struct GeneratedSuite {
  struct Entry {
    scenario::Scenario scenario;
    std::string intended_class;
  };
  std::vector<Entry> scenarios;
  // Classes none of whose own scenarios matched them: generator defects.
  std::vector<std::string> unmatched_classes;
};

// One or more scenarios per class by deterministic template sweeps; runs each
// generated scenario and verifies it matches its own class.
GeneratedSuite generate_tests(const std::vector<BehaviorPatternClass>& classes,
                              std::size_t budget, const scenario::Scenario& base,
                              std::uint64_t seed);

}  // namespace vigil::testkit
