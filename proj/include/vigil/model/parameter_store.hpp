#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "vigil/sim/message.hpp"
#include "vigil/values.hpp"

namespace vigil::model {

using sim::VirtualTime;

// A simple adaptive parameter with a declared admissible range. The value is
// monitored against [lo, hi] (inclusive) but may transiently leave it; that
// excursion is exactly the defect the range monitor exists to catch.
struct ScalarParam {
  std::string name;
  double value = 0;
  double lo = 0;
  double hi = 0;
  double init = 0;

  ScalarParam() = default;
  ScalarParam(std::string name, double init, double lo, double hi);

  bool in_range() const { return value >= lo && value <= hi; }
  bool operator==(const ScalarParam&) const = default;
};

struct Case {
  std::vector<double> features;
  double outcome = 0;
  bool operator==(const Case&) const = default;
};

enum class Forgetting { None, EvictOldest };

// Capped case store. With EvictOldest the size bound holds after every
// operation; with None it grows without limit, which is the documented
// failure mode the memory monitor has to contain.
class CaseBase {
 public:
  CaseBase() = default;
  CaseBase(std::size_t max_size, Forgetting policy);

  void add(Case c);
  void force_evict_to(std::size_t budget);
  void clear() { cases_.clear(); }

  std::size_t size() const { return cases_.size(); }
  std::size_t max_size() const { return max_size_; }
  Forgetting policy() const { return policy_; }
  const std::deque<Case>& cases() const { return cases_; }

  bool operator==(const CaseBase&) const = default;

 private:
  std::size_t max_size_ = 1;
  Forgetting policy_ = Forgetting::None;
  std::deque<Case> cases_;
};

// Response time grows linearly with learned-state size.
struct StepCostModel {
  VirtualTime base_latency = 1;
  VirtualTime per_case_latency = 0;

  VirtualTime latency(std::size_t case_count) const {
    return base_latency + per_case_latency * case_count;
  }
};

struct BoundViolation {
  std::string name;
  double value = 0;
  double lo = 0;
  double hi = 0;
};

// The adaptive state of a component: bounded scalars plus an optional capped
// case base. Adaptive software is parameterized software whose parameters
// change over time; this is the parameter side of that picture.
class ParameterStore {
 public:
  void add_scalar(ScalarParam p) { scalars_.push_back(std::move(p)); }
  void attach_case_base(CaseBase cb) { case_base_ = std::move(cb); }

  std::vector<ScalarParam>& scalars() { return scalars_; }
  const std::vector<ScalarParam>& scalars() const { return scalars_; }
  ScalarParam* find(const std::string& name);
  const ScalarParam* find(const std::string& name) const;

  std::optional<CaseBase>& case_base() { return case_base_; }
  const std::optional<CaseBase>& case_base() const { return case_base_; }

  bool learning_enabled() const { return learning_enabled_; }
  void set_learning_enabled(bool on) { learning_enabled_ = on; }

  // Every scalar back to init, case base emptied. The learning flag is
  // configuration, not learned state, and survives.
  void reinitialize();

  // Exactly the scalars currently outside their declared range.
  std::vector<BoundViolation> check_ranges() const;

  Json to_json() const;
  static ParameterStore from_json(const Json& j);
  bool operator==(const ParameterStore&) const = default;

 private:
  std::vector<ScalarParam> scalars_;
  std::optional<CaseBase> case_base_;
  bool learning_enabled_ = true;
};

// Opaque, immutable state capture used for passive-failover synchronization
// and probe sandboxing.
struct StateImage {
  std::string component_type;
  Json state;
  bool operator==(const StateImage&) const = default;
};

}  // namespace vigil::model
