#pragma once

#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "vigil/model/component.hpp"
#include "vigil/scenario/scenario.hpp"
#include "vigil/sim/kernel.hpp"

namespace vigil::scenario {

// Fixed actor ids of the harness plane.
inline constexpr const char* kSourceId = "traffic";
inline constexpr const char* kSinkId = "actuation";
inline constexpr const char* kGuardianId = "guardian";

// A fully wired simulation ready to run. Owns the kernel; component handles
// stay valid for the kernel's lifetime.
struct Runtime {
  std::unique_ptr<sim::Kernel> kernel;
  Scenario scenario;  // post-override, as actually built
  ComponentId input_target;
  std::vector<std::pair<ComponentId, std::shared_ptr<model::Component>>> components;
  std::shared_ptr<guardian::Guardian> guard;  // null when disabled

  model::Component* component(const ComponentId& id) const;
};

Runtime build_runtime(Scenario s, std::optional<std::uint64_t> seed_override = std::nullopt,
                      std::optional<bool> guardian_override = std::nullopt);

struct RunOutput {
  sim::EventLog log;
  Json report;
};

// Builds, runs to the scenario duration, and computes the report from the
// log alone (so offline recomputation is bit-identical).
RunOutput run_scenario(const Scenario& s,
                       std::optional<std::uint64_t> seed_override = std::nullopt,
                       std::optional<bool> guardian_override = std::nullopt);

}  // namespace vigil::scenario
