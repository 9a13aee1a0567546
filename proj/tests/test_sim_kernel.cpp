#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <memory>

#include "test_helpers.hpp"
#include "vigil/sim/event_log.hpp"
#include "vigil/sim/kernel.hpp"

using namespace vigil;
using namespace vigil::test;
using sim::Kernel;
using sim::Message;
using sim::MessageKind;

namespace {

std::vector<sim::Record> outputs_at(const sim::EventLog& log, const std::string& sink) {
  std::vector<sim::Record> out;
  for (const sim::Record& rec : log.records()) {
    if (rec.kind == "output" && rec.receiver == sink) out.push_back(rec);
  }
  return out;
}

}  // namespace

TEST_CASE("schedule: same-tick events keep insertion order") {
  Kernel k(1);
  auto sink = std::make_shared<Collector>();
  k.register_actor("sink", sink);
  k.schedule(5, make_message("a", "sink", MessageKind::Control, {std::string("A")}));
  k.schedule(5, make_message("b", "sink", MessageKind::Control, {std::string("B")}));
  k.run_until(6);
  REQUIRE(sink->seen.size() == 2);
  CHECK(str(sink->seen[0].payload[0]) == "A");
  CHECK(str(sink->seen[1].payload[0]) == "B");
}

TEST_CASE("schedule: zero-delay event delivered this tick, after queued ones") {
  Kernel k(1);
  auto sink = std::make_shared<Collector>();
  k.register_actor("sink", sink);

  // On its first delivery, schedules another message at the current tick.
  class Chainer : public sim::Actor {
   public:
    void on_message(Kernel& sim, const Message&) override {
      if (!done_) {
        done_ = true;
        sim.schedule(sim.now(), make_message("c", "sink", MessageKind::Control,
                                             {std::string("late")}));
      }
    }
    bool done_ = false;
  };
  k.register_actor("c", std::make_shared<Chainer>());
  k.schedule(3, make_message("x", "c", MessageKind::Control, {}));
  k.schedule(3, make_message("x", "sink", MessageKind::Control, {std::string("early")}));
  k.run_until(4);
  REQUIRE(sink->seen.size() == 2);
  CHECK(str(sink->seen[0].payload[0]) == "early");
  CHECK(str(sink->seen[1].payload[0]) == "late");
  CHECK(sink->seen[1].sent_at == 3);
}

TEST_CASE("schedule: past events are rejected") {
  Kernel k(1);
  auto sink = std::make_shared<Collector>();
  k.register_actor("sink", sink);
  k.run_until(10);
  CHECK_THROWS_AS(k.schedule(5, make_message("a", "sink", MessageKind::Control, {})),
                  SimError);
}

TEST_CASE("send: unknown receiver is an error") {
  Kernel k(1);
  CHECK_THROWS_AS(k.send(make_message("a", "ghost", MessageKind::Control, {}), 1),
                  SimError);
}

TEST_CASE("send: latency zero delivers this tick") {
  Kernel k(1);
  auto sink = std::make_shared<Collector>();
  k.register_actor("sink", sink);
  class Sender : public sim::Actor {
   public:
    void on_message(Kernel&, const Message&) override {}
    void on_tick(Kernel& sim, sim::VirtualTime now) override {
      if (now == 7) {
        sim.send(make_message("s", "sink", MessageKind::Output, {1.0}), 0);
      }
    }
  };
  k.register_actor("s", std::make_shared<Sender>(), true);
  k.run_until(8);
  REQUIRE(sink->seen.size() == 1);
  auto outs = outputs_at(k.log(), "sink");
  REQUIRE(outs.size() == 1);
  CHECK(outs[0].time == 7);
}

TEST_CASE("send: an active Delay fault on the receiver adds latency") {
  // latency 10 plus Delay(5) -> delivered at now()+15
  Kernel k(1);
  auto sink = std::make_shared<Collector>();
  k.register_actor("sink", sink);
  k.inject_fault({"sink", sim::Delay{5}, 0, 1000});
  k.schedule_action(0, [](Kernel& sim) {
    sim.send(make_message("a", "sink", MessageKind::Output, {2.0}), 10);
  });
  k.run_until(20);
  auto outs = outputs_at(k.log(), "sink");
  REQUIRE(outs.size() == 1);
  CHECK(outs[0].time == 15);
  CHECK(outs[0].sent_at == 0);
}

TEST_CASE("crashed receiver drops messages and records the drop") {
  Kernel k(1);
  auto sink = std::make_shared<Collector>();
  k.register_actor("sink", sink);
  k.inject_fault({"sink", sim::Crash{}, 5, 6});
  k.schedule_action(10, [](Kernel& sim) {
    sim.send(make_message("a", "sink", MessageKind::Output, {1.0}), 1);
  });
  k.run_until(20);
  CHECK(sink->seen.empty());
  bool dropped = false;
  for (const sim::Record& rec : k.log().records()) {
    if (rec.kind == sim::tag::kDrop && rec.receiver == "sink") dropped = true;
  }
  CHECK(dropped);
}

TEST_CASE("inject_fault: unknown target is an error") {
  Kernel k(1);
  CHECK_THROWS_AS(k.inject_fault({"ghost", sim::Crash{}, 0, 1}), SimError);
}

TEST_CASE("crash silences a component until restart") {
  Kernel k(1);
  auto sink = std::make_shared<Collector>();
  k.register_actor("sink", sink);
  k.register_actor("beacon", std::make_shared<Beacon>("beacon", "sink"), true);
  k.inject_fault({"beacon", sim::Crash{}, 100, 101});
  k.schedule_action(160, [](Kernel& sim) { sim.begin_restart("beacon", 40); });
  k.run_until(300);

  std::vector<sim::VirtualTime> emitted;
  for (const sim::Record& rec : outputs_at(k.log(), "sink")) emitted.push_back(rec.time);
  // one output per tick up to the crash, nothing in [100, 200), resumed at 200
  CHECK(std::count_if(emitted.begin(), emitted.end(),
                      [](sim::VirtualTime t) { return t < 100; }) == 100);
  CHECK(std::none_of(emitted.begin(), emitted.end(),
                     [](sim::VirtualTime t) { return t >= 100 && t < 200; }));
  CHECK(std::count_if(emitted.begin(), emitted.end(),
                      [](sim::VirtualTime t) { return t >= 200; }) == 100);
}

TEST_CASE("hang suspends deliveries within the window and resumes after") {
  auto run = [](bool faulted) {
    Kernel k(1);
    auto sink = std::make_shared<Collector>();
    k.register_actor("sink", sink);
    k.register_actor("echo", std::make_shared<Echo>("echo", "sink", 1));
    if (faulted) k.inject_fault({"echo", sim::Hang{}, 100, 150});
    for (sim::VirtualTime t = 90; t < 160; t += 10) {
      k.schedule(t, make_message("src", "echo", MessageKind::Input,
                                 {static_cast<double>(t)}));
    }
    k.run_until(300);
    return outputs_at(k.log(), "sink");
  };

  auto clean = run(false);
  auto faulted = run(true);
  CHECK(clean.size() == faulted.size());
  // inputs landing in [100,150) are answered only after the hang window closes
  for (const sim::Record& rec : faulted) {
    bool in_window = rec.time > 100 && rec.time < 151;
    CHECK(!in_window);
  }
  auto payload_of = [](const sim::Record& r) { return num(r.payload[0]); };
  std::vector<double> a, b;
  for (const auto& r : clean) a.push_back(payload_of(r));
  for (const auto& r : faulted) b.push_back(payload_of(r));
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  CHECK(a == b);
}

TEST_CASE("corrupt output replaces the configured channel inside the window") {
  Kernel k(1);
  auto sink = std::make_shared<Collector>();
  k.register_actor("sink", sink);
  k.register_actor("echo", std::make_shared<Echo>("echo", "sink", 1));
  k.inject_fault({"echo", sim::CorruptOutput{0, 999.0}, 100, 200});
  for (sim::VirtualTime t = 50; t < 250; t += 50) {
    k.schedule(t, make_message("src", "echo", MessageKind::Input, {7.0, 8.0}));
  }
  k.run_until(300);
  auto outs = outputs_at(k.log(), "sink");
  REQUIRE(outs.size() == 4);
  for (const sim::Record& rec : outs) {
    double expected = (rec.sent_at >= 100 && rec.sent_at < 200) ? 999.0 : 7.0;
    CHECK(num(rec.payload[0]) == expected);
    CHECK(num(rec.payload[1]) == 8.0);
  }
}

TEST_CASE("run_until(0) on a fresh kernel yields an empty log") {
  Kernel k(123);
  const sim::EventLog& log = k.run_until(0);
  CHECK(log.records().empty());
  CHECK(log.seed() == 123);
}

namespace {

// Schedules a reproducible random message load among three echo components.
void random_load(Kernel& k, std::size_t n) {
  k.register_actor("sink", std::make_shared<Collector>());
  for (const char* id : {"c0", "c1", "c2"}) {
    k.register_actor(id, std::make_shared<Echo>(id, "sink", 1));
  }
  for (std::size_t i = 0; i < n; ++i) {
    sim::VirtualTime at = k.rng().uniform_u64(0, 900);
    std::string target = "c" + std::to_string(k.rng().uniform_u64(0, 2));
    double payload = k.rng().uniform_real(0, 1);
    k.schedule(at, make_message("load", target, MessageKind::Input, {payload}));
  }
}

}  // namespace

TEST_CASE("determinism: 1000 random events replay byte-identically") {
  auto run = [] {
    Kernel k(424242);
    random_load(k, 1000);
    k.run_until(1000);
    return k.log().to_jsonl();
  };
  CHECK(run() == run());
}

TEST_CASE("run_until is prefix-stable across split horizons") {
  auto build = [] {
    auto k = std::make_unique<Kernel>(77);
    random_load(*k, 300);
    return k;
  };
  auto split = build();
  split->run_until(500);
  std::string at_500 = split->log().to_jsonl();
  split->run_until(1000);

  auto whole = build();
  whole->run_until(1000);

  CHECK(split->log().to_jsonl() == whole->log().to_jsonl());
  CHECK(whole->log().to_jsonl().substr(0, at_500.size()) == at_500);
}

TEST_CASE("causality: nothing is delivered before sent_at") {
  Kernel k(9);
  random_load(k, 500);
  k.run_until(1000);
  for (const sim::Record& rec : k.log().records()) {
    if (rec.kind == "input" || rec.kind == "output") {
      CHECK(rec.time >= rec.sent_at);
    }
  }
}

TEST_CASE("event log serializes and parses back") {
  Kernel k(5);
  random_load(k, 50);
  k.run_until(200);
  std::string text = k.log().to_jsonl();
  sim::EventLog parsed = sim::EventLog::from_jsonl(text);
  CHECK(parsed.seed() == 5);
  REQUIRE(parsed.records().size() == k.log().records().size());
  CHECK(parsed.to_jsonl() == text);
}

TEST_CASE("corrupt log lines are reported with their line number") {
  std::string text =
      R"({"time":0,"kind":"run_header","sender":"kernel","receiver":"","is_test":false,"payload":["7"]}
{"time":1,"kind":"output","sender":"a","receiver":"b","is_test":false,"payload":[1.0]}
{"time":2,"kind":"output","sender":"a","receiver":)";
  try {
    sim::EventLog::from_jsonl(text);
    FAIL("expected CorruptLog");
  } catch (const SimError& e) {
    CHECK(e.code() == Err::CorruptLog);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("empty log text parses to an empty log") {
  sim::EventLog log = sim::EventLog::from_jsonl("");
  CHECK(log.records().empty());
}
