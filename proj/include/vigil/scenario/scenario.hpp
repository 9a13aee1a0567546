#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vigil/demo/overtake.hpp"
#include "vigil/guardian/guardian.hpp"
#include "vigil/model/parameter_store.hpp"
#include "vigil/redundancy/redundancy.hpp"
#include "vigil/sim/fault.hpp"

namespace vigil::scenario {

using sim::ComponentId;
using sim::VirtualTime;

struct ComponentSpec {
  ComponentId id;
  std::string type;  // "overtake" | "fallback"
  demo::DecisionParams params;
  model::StepCostModel cost{2, 0};
  std::optional<std::pair<std::size_t, model::Forgetting>> case_base;
  bool learning_enabled = true;
};

struct SupervisionSpec {
  enum class Mode { None, Flat, Cascade };
  Mode mode = Mode::None;
  std::vector<ComponentId> targets;  // flat targets, or the cascade order
};

struct WatchdogSpec {
  ComponentId target;
  std::string predicate;
};

struct GuardianSpec {
  bool enabled = false;
  guardian::GuardianConfig config;
  std::vector<WatchdogSpec> watchdogs;
};

struct RedundancySpec {
  ComponentId group_id;
  redundancy::RedundancyGroup group;
};

struct TrafficSpec {
  VirtualTime sample_period = 100;
  std::optional<demo::TrafficGenSpec> generator;
  std::vector<ValueList> trace;  // one snapshot per sample when no generator
};

struct FeedbackEvent {
  VirtualTime at = 0;
  ComponentId target;
  double value = 0;
};

// One experiment of record: components, topology, guardian and redundancy
// configuration, traffic, fault campaign, criticality timeline, seed and
// duration. Schema-validated before any run; unknown keys are rejected.
struct Scenario {
  int schema_version = 1;
  std::uint64_t seed = 1;
  VirtualTime duration = 10000;
  VirtualTime function_deadline = 80;
  double failure_cost = 1000.0;
  VirtualTime bus_latency = 1;
  std::vector<ComponentSpec> components;
  SupervisionSpec supervision;
  std::vector<RedundancySpec> redundancy;
  GuardianSpec guardian;
  TrafficSpec traffic;
  std::vector<FeedbackEvent> feedback;
  std::vector<sim::FaultSpec> faults;
  std::vector<std::pair<VirtualTime, VirtualTime>> criticality;
  std::optional<ComponentId> input_target;

  void validate() const;
  const ComponentSpec* find_component(const ComponentId& id) const;
  ComponentId resolved_input_target() const;
};

Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

}  // namespace vigil::scenario
