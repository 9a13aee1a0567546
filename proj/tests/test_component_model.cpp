#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <optional>

#include "vigil/model/component.hpp"
#include "vigil/sim/rng.hpp"

using namespace vigil;
using model::CaseBase;
using model::Component;
using model::Forgetting;
using model::ParameterStore;
using model::ScalarParam;
using model::StepCostModel;

namespace {

// Minimal concrete component: one bounded threshold, optional case memory.
class Learner : public Component {
 public:
  explicit Learner(StepCostModel cost = {2, 1},
                   std::optional<CaseBase> cb = std::nullopt)
      : Component("learner", cost) {
    params().add_scalar(ScalarParam("threshold", 1.0, 0.0, 2.0));
    if (cb) params().attach_case_base(std::move(*cb));
  }

 protected:
  ValueList do_step(const ValueList& inputs, sim::VirtualTime) override {
    double x = inputs.empty() ? 0.0 : num(inputs[0]);
    return {x * params().find("threshold")->value,
            static_cast<double>(case_count())};
  }

  void do_learn(const ValueList& obs) override {
    if (!obs.empty() && is_num(obs[0])) {
      params().find("threshold")->value += num(obs[0]);
      if (params().case_base()) {
        params().case_base()->add({{num(obs[0])}, 1.0});
      }
    }
  }
};

class OtherType : public Component {
 public:
  OtherType() : Component("other", {1, 0}) {}

 protected:
  ValueList do_step(const ValueList&, sim::VirtualTime) override { return {0.0}; }
};

}  // namespace

TEST_CASE("step latency follows the linear cost model") {
  Learner empty({2, 1}, CaseBase(100, Forgetting::None));
  CHECK(empty.step({1.0}, 0).latency == 2);  // zero cases -> base only

  Learner loaded({2, 1}, CaseBase(100, Forgetting::None));
  for (int i = 0; i < 8; ++i) loaded.learn({0.0});
  CHECK(loaded.case_count() == 8);
  CHECK(loaded.step({1.0}, 0).latency == 10);  // 2 + 1*8
}

TEST_CASE("step latency is non-decreasing in the case count") {
  Learner c({3, 2}, CaseBase(1000, Forgetting::None));
  sim::VirtualTime last = 0;
  for (int i = 0; i < 50; ++i) {
    sim::VirtualTime lat = c.step({1.0}, i).latency;
    CHECK(lat >= last);
    last = lat;
    c.learn({0.0});
  }
}

TEST_CASE("step is a pure function of state and inputs") {
  Learner c;
  ValueList a = c.step({3.0}, 5).outputs;
  ValueList b = c.step({3.0}, 5).outputs;
  CHECK(a == b);
}

TEST_CASE("learning disabled leaves the store bit-identical") {
  Learner c({2, 1}, CaseBase(10, Forgetting::None));
  c.params().set_learning_enabled(false);
  ParameterStore before = c.params();
  sim::Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    c.learn({rng.uniform_real(-5, 5)});
  }
  CHECK(c.params() == before);
}

TEST_CASE("EvictOldest keeps the newest max_size cases") {
  CaseBase cb(3, Forgetting::EvictOldest);
  for (double v : {1.0, 2.0, 3.0, 4.0}) cb.add({{v}, 0.0});
  REQUIRE(cb.size() == 3);
  CHECK(cb.cases()[0].features[0] == 2.0);
  CHECK(cb.cases()[1].features[0] == 3.0);
  CHECK(cb.cases()[2].features[0] == 4.0);
}

TEST_CASE("eviction bound holds for random operation sequences") {
  sim::Rng rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    std::size_t cap = rng.uniform_u64(1, 8);
    Learner c({1, 0}, CaseBase(cap, Forgetting::EvictOldest));
    int ops = static_cast<int>(rng.uniform_u64(1, 40));
    for (int i = 0; i < ops; ++i) {
      if (rng.chance(0.6)) {
        c.learn({rng.uniform_real(-1, 1)});
      } else {
        c.step({rng.uniform_real(0, 1)}, i);
      }
      CHECK(c.case_count() <= cap);
    }
  }
}

TEST_CASE("forgetting=None grows without bound") {
  Learner c({1, 0}, CaseBase(4, Forgetting::None));
  for (int i = 0; i < 25; ++i) c.learn({1.0});
  CHECK(c.case_count() == 25);
}

TEST_CASE("reinitialize restores init values and empties the case base") {
  Learner c({2, 1}, CaseBase(50, Forgetting::None));
  SUBCASE("fresh component: reinitialize is identity on observable state") {
    ValueList before = c.step({2.0}, 0).outputs;
    c.reinitialize();
    CHECK(c.step({2.0}, 1).outputs == before);
  }
  SUBCASE("out-of-range scalar returns to init") {
    c.learn({5.0});  // threshold -> 6.0, beyond hi
    CHECK(c.params().find("threshold")->value == 6.0);
    c.reinitialize();
    CHECK(c.params().find("threshold")->value == 1.0);
    CHECK(c.case_count() == 0);
  }
}

TEST_CASE("after reinitialize the component behaves like a fresh one") {
  Learner used({2, 1}, CaseBase(50, Forgetting::None));
  sim::Rng rng(4);
  for (int i = 0; i < 30; ++i) {
    used.learn({rng.uniform_real(-1, 1)});
    used.step({rng.uniform_real(0, 2)}, i);
  }
  used.reinitialize();

  Learner fresh({2, 1}, CaseBase(50, Forgetting::None));
  for (int i = 0; i < 20; ++i) {
    double x = 0.1 * i;
    auto a = used.step({x}, i);
    auto b = fresh.step({x}, i);
    CHECK(a.outputs == b.outputs);
    CHECK(a.latency == b.latency);
  }
}

TEST_CASE("snapshot/restore round-trips observable behavior") {
  Learner c({2, 1}, CaseBase(10, Forgetting::EvictOldest));
  c.learn({0.5});
  model::StateImage img = c.snapshot();
  ValueList direct = c.step({1.5}, 3).outputs;

  Learner other;
  other.learn({-0.3});
  other.restore(img);
  CHECK(other.step({1.5}, 3).outputs == direct);
  CHECK(other.params() == c.params());
}

TEST_CASE("restore into a standby makes its outputs track the primary") {
  Learner primary({2, 1}, CaseBase(10, Forgetting::EvictOldest));
  sim::Rng rng(21);
  for (int i = 0; i < 15; ++i) primary.learn({rng.uniform_real(-0.2, 0.2)});

  Learner standby({2, 1}, CaseBase(10, Forgetting::EvictOldest));
  standby.restore(primary.snapshot());
  for (int i = 0; i < 10; ++i) {
    double x = 0.3 * i;
    CHECK(standby.step({x}, i).outputs == primary.step({x}, i).outputs);
  }
}

TEST_CASE("restore rejects images from a different component type") {
  Learner c;
  OtherType other;
  try {
    c.restore(other.snapshot());
    FAIL("expected TypeMismatch");
  } catch (const SimError& e) {
    CHECK(e.code() == Err::TypeMismatch);
  }
}

TEST_CASE("param_check reports exactly the out-of-range scalars") {
  Learner c;
  SUBCASE("all at init: empty") { CHECK(c.param_check().empty()); }
  SUBCASE("value exactly at hi: bounds are inclusive") {
    c.params().find("threshold")->value = 2.0;
    CHECK(c.param_check().empty());
  }
  SUBCASE("value just past hi: one violation") {
    c.params().find("threshold")->value = 2.001;
    auto violations = c.param_check();
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].name == "threshold");
    CHECK(violations[0].value == 2.001);
  }
}

TEST_CASE("scalar params validate their construction invariant") {
  CHECK_THROWS_AS(ScalarParam("bad", 5.0, 0.0, 2.0), SimError);
  CHECK_THROWS_AS(CaseBase(0, Forgetting::None), SimError);
}
