#include "vigil/model/parameter_store.hpp"

#include <algorithm>
#include <stdexcept>

#include "vigil/errors.hpp"

namespace vigil::model {

ScalarParam::ScalarParam(std::string name_, double init_, double lo_, double hi_)
    : name(std::move(name_)), value(init_), lo(lo_), hi(hi_), init(init_) {
  if (!(lo <= init && init <= hi)) {
    raise(Err::SchemaViolation, "scalar '" + name + "': init outside [lo, hi]");
  }
}

CaseBase::CaseBase(std::size_t max_size, Forgetting policy)
    : max_size_(max_size), policy_(policy) {
  if (max_size_ == 0) raise(Err::SchemaViolation, "case base max_size must be positive");
}

void CaseBase::add(Case c) {
  cases_.push_back(std::move(c));
  if (policy_ == Forgetting::EvictOldest) {
    while (cases_.size() > max_size_) cases_.pop_front();
  }
}

void CaseBase::force_evict_to(std::size_t budget) {
  while (cases_.size() > budget) cases_.pop_front();
}

ScalarParam* ParameterStore::find(const std::string& name) {
  for (ScalarParam& p : scalars_) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

const ScalarParam* ParameterStore::find(const std::string& name) const {
  for (const ScalarParam& p : scalars_) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

void ParameterStore::reinitialize() {
  for (ScalarParam& p : scalars_) p.value = p.init;
  if (case_base_) case_base_->clear();
}

std::vector<BoundViolation> ParameterStore::check_ranges() const {
  std::vector<BoundViolation> out;
  for (const ScalarParam& p : scalars_) {
    if (!p.in_range()) out.push_back({p.name, p.value, p.lo, p.hi});
  }
  return out;
}

Json ParameterStore::to_json() const {
  Json j;
  j["learning_enabled"] = learning_enabled_;
  Json scalars = Json::array();
  for (const ScalarParam& p : scalars_) {
    scalars.push_back({{"name", p.name},
                       {"value", p.value},
                       {"lo", p.lo},
                       {"hi", p.hi},
                       {"init", p.init}});
  }
  j["scalars"] = scalars;
  if (case_base_) {
    Json cb;
    cb["max_size"] = case_base_->max_size();
    cb["policy"] = case_base_->policy() == Forgetting::EvictOldest ? "evict_oldest" : "none";
    Json cases = Json::array();
    for (const Case& c : case_base_->cases()) {
      cases.push_back({{"features", c.features}, {"outcome", c.outcome}});
    }
    cb["cases"] = cases;
    j["case_base"] = cb;
  }
  return j;
}

ParameterStore ParameterStore::from_json(const Json& j) {
  ParameterStore store;
  store.learning_enabled_ = j.at("learning_enabled").get<bool>();
  for (const Json& s : j.at("scalars")) {
    ScalarParam p;
    p.name = s.at("name").get<std::string>();
    p.value = s.at("value").get<double>();
    p.lo = s.at("lo").get<double>();
    p.hi = s.at("hi").get<double>();
    p.init = s.at("init").get<double>();
    store.scalars_.push_back(std::move(p));
  }
  if (j.contains("case_base")) {
    const Json& cb = j.at("case_base");
    CaseBase base(cb.at("max_size").get<std::size_t>(),
                  cb.at("policy").get<std::string>() == "evict_oldest"
                      ? Forgetting::EvictOldest
                      : Forgetting::None);
    for (const Json& c : cb.at("cases")) {
      Case one;
      one.features = c.at("features").get<std::vector<double>>();
      one.outcome = c.at("outcome").get<double>();
      base.add(std::move(one));
    }
    store.case_base_ = std::move(base);
  }
  return store;
}

}  // namespace vigil::model
