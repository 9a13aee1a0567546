#pragma once

#include <memory>
#include <string>
#include <vector>

#include "vigil/model/parameter_store.hpp"
#include "vigil/sim/message.hpp"

namespace vigil::model {

// The abstract supervised component: steps on inputs, optionally learns,
// exposes its adaptive parameters for monitoring, and supports
// snapshot/restore plus reinitialization.
class Component {
 public:
  Component(std::string type_name, StepCostModel cost)
      : type_name_(std::move(type_name)), cost_(cost) {}
  virtual ~Component() = default;

  const std::string& type_name() const { return type_name_; }
  ParameterStore& params() { return params_; }
  const ParameterStore& params() const { return params_; }
  const StepCostModel& cost_model() const { return cost_; }

  struct StepResult {
    ValueList outputs;
    VirtualTime latency = 0;
  };

  // Outputs are a pure function of (internal state, inputs, now); latency
  // follows the cost model at the current case-base size.
  StepResult step(const ValueList& inputs, VirtualTime now);

  // No-op when learning is disabled: the store is bit-identical afterwards.
  void learn(const ValueList& observation);

  void reinitialize();

  StateImage snapshot() const;
  void restore(const StateImage& img);  // TypeMismatch on wrong component type

  std::vector<BoundViolation> param_check() const { return params_.check_ranges(); }

  // Instrumentable decision points (static enumeration) and the points
  // executed by the most recent step.
  virtual std::vector<std::string> decision_points() const { return {}; }
  const std::vector<std::string>& last_hits() const { return hits_; }

  std::size_t case_count() const {
    return params_.case_base() ? params_.case_base()->size() : 0;
  }

 protected:
  virtual ValueList do_step(const ValueList& inputs, VirtualTime now) = 0;
  virtual void do_learn(const ValueList& observation) { (void)observation; }
  virtual void do_reinitialize() {}
  virtual Json extra_state() const { return Json::object(); }
  virtual void restore_extra(const Json& j) { (void)j; }

  void hit(const char* point) { hits_.emplace_back(point); }
  bool learning_on() const { return params_.learning_enabled(); }

 private:
  std::string type_name_;
  StepCostModel cost_;
  ParameterStore params_;
  std::vector<std::string> hits_;
};

}  // namespace vigil::model
