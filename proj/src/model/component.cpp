#include "vigil/model/component.hpp"

#include "vigil/errors.hpp"

namespace vigil::model {

Component::StepResult Component::step(const ValueList& inputs, VirtualTime now) {
  hits_.clear();
  StepResult result;
  VirtualTime latency = cost_.latency(case_count());
  result.outputs = do_step(inputs, now);
  result.latency = latency;
  return result;
}

void Component::learn(const ValueList& observation) {
  if (!params_.learning_enabled()) return;
  do_learn(observation);
}

void Component::reinitialize() {
  params_.reinitialize();
  do_reinitialize();
}

StateImage Component::snapshot() const {
  StateImage img;
  img.component_type = type_name_;
  img.state["params"] = params_.to_json();
  img.state["extra"] = extra_state();
  return img;
}

void Component::restore(const StateImage& img) {
  if (img.component_type != type_name_) {
    raise(Err::TypeMismatch, "state image of type '" + img.component_type +
                                 "' restored into '" + type_name_ + "'");
  }
  params_ = ParameterStore::from_json(img.state.at("params"));
  restore_extra(img.state.at("extra"));
}

}  // namespace vigil::model
