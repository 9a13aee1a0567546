#include "vigil/scenario/report.hpp"

#include <map>
#include <span>
#include <sstream>
#include <vector>

#include "vigil/scenario/runtime.hpp"
#include "vigil/testkit/coverage.hpp"

namespace vigil::scenario {

void write_meta_records(sim::Kernel& sim, const Runtime& rt) {
  const Scenario& s = rt.scenario;
  auto meta = [&sim](ValueList payload) {
    sim.record(sim::tag::kMeta, "kernel", "", std::move(payload));
  };
  meta({std::string("duration"), static_cast<double>(s.duration)});
  meta({std::string("sample_period"), static_cast<double>(s.traffic.sample_period)});
  meta({std::string("function_deadline"), static_cast<double>(s.function_deadline)});
  meta({std::string("failure_cost"), s.failure_cost});
  meta({std::string("guardian_enabled"), s.guardian.enabled ? 1.0 : 0.0});
  meta({std::string("function"), rt.input_target});
  meta({std::string("sink"), std::string(kSinkId)});
  for (const auto& [id, comp] : rt.components) {
    for (const std::string& point : comp->decision_points()) {
      meta({std::string("decision_point"), point});
    }
    for (const model::ScalarParam& p : comp->params().scalars()) {
      if (comp->params().learning_enabled()) {
        meta({std::string("param_grid"), p.name, p.lo, p.hi, 10.0});
      }
    }
  }
  for (const sim::FaultSpec& f : s.faults) {
    meta({std::string("fault"), f.target, std::string(sim::fault_kind_name(f.kind)),
          static_cast<double>(f.active_from), static_cast<double>(f.active_until)});
  }
}

namespace {

struct Meta {
  sim::VirtualTime duration = 0;
  sim::VirtualTime sample_period = 100;
  sim::VirtualTime function_deadline = 80;
  double failure_cost = 0;
  bool guardian_enabled = false;
  std::string function_id;
  std::string sink_id = "actuation";
  std::vector<std::string> decision_points;
  std::vector<testkit::ParamGridSpec> grids;
  struct FaultRow {
    std::string target;
    std::string kind;
    sim::VirtualTime from = 0;
    sim::VirtualTime until = 0;
  };
  std::vector<FaultRow> faults;
};

Meta read_meta(const sim::EventLog& log) {
  Meta m;
  for (const sim::Record& rec : log.records()) {
    if (rec.kind != sim::tag::kMeta || rec.payload.empty()) continue;
    const std::string& key = str(rec.payload[0]);
    if (key == "duration") {
      m.duration = static_cast<sim::VirtualTime>(num(rec.payload[1]));
    } else if (key == "sample_period") {
      m.sample_period = static_cast<sim::VirtualTime>(num(rec.payload[1]));
    } else if (key == "function_deadline") {
      m.function_deadline = static_cast<sim::VirtualTime>(num(rec.payload[1]));
    } else if (key == "failure_cost") {
      m.failure_cost = num(rec.payload[1]);
    } else if (key == "guardian_enabled") {
      m.guardian_enabled = num(rec.payload[1]) != 0.0;
    } else if (key == "function") {
      m.function_id = str(rec.payload[1]);
    } else if (key == "sink") {
      m.sink_id = str(rec.payload[1]);
    } else if (key == "decision_point") {
      m.decision_points.push_back(str(rec.payload[1]));
    } else if (key == "param_grid") {
      m.grids.push_back({str(rec.payload[1]), num(rec.payload[2]), num(rec.payload[3]),
                         static_cast<int>(num(rec.payload[4]))});
    } else if (key == "fault") {
      m.faults.push_back({str(rec.payload[1]), str(rec.payload[2]),
                          static_cast<sim::VirtualTime>(num(rec.payload[3])),
                          static_cast<sim::VirtualTime>(num(rec.payload[4]))});
    }
  }
  return m;
}

}  // namespace

Json compute_report(const sim::EventLog& log) {
  Meta meta = read_meta(log);
  Json report;
  report["seed"] = log.seed();
  report["duration"] = meta.duration;

  // Availability: response windows [s, s+deadline) for every sample tick s
  // whose window closes inside the run.
  std::uint64_t expected = 0, delivered = 0;
  if (meta.sample_period > 0) {
    std::vector<sim::VirtualTime> outputs;
    for (const sim::Record& rec : log.records()) {
      if (rec.kind == kind_name(sim::MessageKind::Output) && !rec.is_test &&
          rec.receiver == meta.sink_id) {
        outputs.push_back(rec.time);
      }
    }
    std::size_t cursor = 0;
    for (sim::VirtualTime s = 0; s + meta.function_deadline < meta.duration;
         s += meta.sample_period) {
      ++expected;
      while (cursor < outputs.size() && outputs[cursor] < s) ++cursor;
      if (cursor < outputs.size() && outputs[cursor] < s + meta.function_deadline) {
        ++delivered;
      }
    }
  }
  Json availability;
  availability["expected"] = expected;
  availability["delivered"] = delivered;
  availability["ratio"] =
      expected == 0 ? 0.0 : static_cast<double>(delivered) / static_cast<double>(expected);
  report["availability"] = availability;

  // Verdict counts by kind and cause.
  std::map<std::string, std::map<std::string, std::uint64_t>> verdicts;
  for (const sim::Record& rec : log.records()) {
    if (rec.kind != sim::tag::kVerdict || rec.payload.size() < 2) continue;
    verdicts[str(rec.payload[0])][str(rec.payload[1])] += 1;
  }
  Json verdict_json = Json::object();
  for (const auto& [kind, causes] : verdicts) {
    Json by_cause = Json::object();
    for (const auto& [cause, n] : causes) by_cause[cause] = n;
    verdict_json[kind] = by_cause;
  }
  report["verdicts"] = verdict_json;

  std::uint64_t exposure = meta.duration;
  report["risk"] = testkit::risk_report(std::span<const sim::EventLog>(&log, 1),
                                        meta.failure_cost,
                                        std::span<const std::uint64_t>(&exposure, 1))
                       .to_json();

  testkit::DecisionMap map{meta.decision_points};
  report["coverage"] = testkit::statement_coverage(log, map).to_json();

  Json param_cov = Json::array();
  for (const testkit::ParamGridSpec& grid : meta.grids) {
    param_cov.push_back(testkit::param_coverage(log, grid).to_json());
  }
  report["param_coverage"] = param_cov;

  // Crash detection latency, measured from the log records.
  Json detection = Json::array();
  for (const Meta::FaultRow& f : meta.faults) {
    if (f.kind != "crash") continue;
    Json row;
    row["target"] = f.target;
    row["at"] = f.from;
    bool found = false;
    for (const sim::Record& rec : log.records()) {
      if (rec.kind != sim::tag::kVerdict || rec.time < f.from) continue;
      if (rec.sender != f.target || rec.payload.size() < 2) continue;
      if (str(rec.payload[1]) != "missed_pong") continue;
      row["detected_at"] = rec.time;
      row["latency"] = rec.time - f.from;
      found = true;
      break;
    }
    if (!found) row["detected_at"] = nullptr;
    detection.push_back(row);
  }
  report["detection"] = detection;

  std::uint64_t messages = 0, drops = 0, restarts = 0, deferrals = 0;
  for (const sim::Record& rec : log.records()) {
    if (rec.kind == sim::tag::kDrop) ++drops;
    if (rec.kind == sim::tag::kRestartBegin) ++restarts;
    if (rec.kind == sim::tag::kProbeDeferred) ++deferrals;
    for (sim::MessageKind k :
         {sim::MessageKind::Input, sim::MessageKind::Output, sim::MessageKind::Ping,
          sim::MessageKind::Pong, sim::MessageKind::Probe,
          sim::MessageKind::ProbeResponse, sim::MessageKind::Control}) {
      if (rec.kind == kind_name(k)) ++messages;
    }
  }
  Json counts;
  counts["messages"] = messages;
  counts["drops"] = drops;
  counts["restarts"] = restarts;
  counts["probe_deferrals"] = deferrals;
  report["counts"] = counts;
  return report;
}

std::string render_table(const Json& report) {
  std::ostringstream out;
  out << "run seed " << report["seed"] << ", " << report["duration"] << " ticks\n";
  const Json& av = report["availability"];
  out << "availability     " << av["delivered"] << "/" << av["expected"] << " = "
      << av["ratio"].dump() << "\n";
  const Json& risk = report["risk"];
  out << "failures         " << risk["failures"] << " over " << risk["exposure_ticks"]
      << " ticks, rate " << risk["rate"].dump() << ", risk " << risk["risk"].dump()
      << "\n";
  out << "verdicts         " << report["verdicts"].dump() << "\n";
  const Json& cov = report["coverage"];
  out << "coverage         ratio " << cov["ratio"].dump() << ", zero-hit "
      << cov["zero_hit"].dump() << "\n";
  for (const Json& pc : report["param_coverage"]) {
    out << "param coverage   " << pc["name"].get<std::string>() << " ratio "
        << pc["ratio"].dump() << "\n";
  }
  for (const Json& d : report["detection"]) {
    out << "detection        " << d["target"].get<std::string>() << " crash at "
        << d["at"] << " detected " << d["detected_at"].dump() << "\n";
  }
  const Json& counts = report["counts"];
  out << "counts           messages " << counts["messages"] << ", drops "
      << counts["drops"] << ", restarts " << counts["restarts"] << ", deferrals "
      << counts["probe_deferrals"] << "\n";
  return out.str();
}

}  // namespace vigil::scenario
