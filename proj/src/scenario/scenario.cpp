#include "vigil/scenario/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace vigil::scenario {

namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
  raise(Err::SchemaViolation, "scenario: " + path + ": " + what);
}

void require_keys(const Json& j, const std::set<std::string>& allowed,
                  const std::string& path) {
  if (!j.is_object()) schema_error(path, "expected an object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) schema_error(path + "." + key, "unknown key");
  }
}

double get_num(const Json& j, const char* key, double fallback,
               const std::string& path) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) schema_error(path + "." + key, "expected a number");
  return j.at(key).get<double>();
}

VirtualTime get_time(const Json& j, const char* key, VirtualTime fallback,
                     const std::string& path) {
  double v = get_num(j, key, static_cast<double>(fallback), path);
  if (v < 0) schema_error(path + "." + key, "must be >= 0");
  return static_cast<VirtualTime>(v);
}

std::vector<std::pair<VirtualTime, VirtualTime>> parse_windows(
    const Json& j, const std::string& path) {
  std::vector<std::pair<VirtualTime, VirtualTime>> out;
  if (!j.is_array()) schema_error(path, "expected an array of [from, until] pairs");
  for (const Json& w : j) {
    if (!w.is_array() || w.size() != 2) {
      schema_error(path, "expected [from, until] pairs");
    }
    out.emplace_back(w[0].get<VirtualTime>(), w[1].get<VirtualTime>());
  }
  return out;
}

ComponentSpec parse_component(const Json& j, const std::string& path) {
  require_keys(j, {"id", "type", "params", "cost", "case_base", "learning_enabled"},
               path);
  ComponentSpec spec;
  if (!j.contains("id") || !j.contains("type")) {
    schema_error(path, "component needs id and type");
  }
  spec.id = j.at("id").get<std::string>();
  spec.type = j.at("type").get<std::string>();
  if (spec.type != "overtake" && spec.type != "fallback") {
    schema_error(path + ".type", "unknown component type '" + spec.type + "'");
  }
  if (j.contains("params")) {
    const Json& p = j.at("params");
    require_keys(p,
                 {"min_time_gap", "dt_base", "dt_speed_coeff", "consecutive_required",
                  "learn_step", "lane_change_samples", "pass_clearance_m"},
                 path + ".params");
    if (p.contains("min_time_gap")) {
      const Json& g = p.at("min_time_gap");
      require_keys(g, {"init", "lo", "hi"}, path + ".params.min_time_gap");
      spec.params.min_time_gap = model::ScalarParam(
          "min_time_gap", g.at("init").get<double>(), g.at("lo").get<double>(),
          g.at("hi").get<double>());
    }
    spec.params.dt_base = get_num(p, "dt_base", spec.params.dt_base, path);
    spec.params.dt_speed_coeff =
        get_num(p, "dt_speed_coeff", spec.params.dt_speed_coeff, path);
    spec.params.consecutive_required = static_cast<int>(get_num(
        p, "consecutive_required", spec.params.consecutive_required, path));
    spec.params.learn_step = get_num(p, "learn_step", spec.params.learn_step, path);
    spec.params.lane_change_samples = static_cast<int>(
        get_num(p, "lane_change_samples", spec.params.lane_change_samples, path));
    spec.params.pass_clearance_m =
        get_num(p, "pass_clearance_m", spec.params.pass_clearance_m, path);
  }
  if (j.contains("cost")) {
    const Json& c = j.at("cost");
    require_keys(c, {"base_latency", "per_case_latency"}, path + ".cost");
    spec.cost.base_latency = get_time(c, "base_latency", spec.cost.base_latency, path);
    spec.cost.per_case_latency =
        get_time(c, "per_case_latency", spec.cost.per_case_latency, path);
  }
  if (j.contains("case_base")) {
    const Json& cb = j.at("case_base");
    require_keys(cb, {"max_size", "forgetting"}, path + ".case_base");
    std::string policy = cb.contains("forgetting")
                             ? cb.at("forgetting").get<std::string>()
                             : "none";
    if (policy != "none" && policy != "evict_oldest") {
      schema_error(path + ".case_base.forgetting", "must be none or evict_oldest");
    }
    spec.case_base = {cb.at("max_size").get<std::size_t>(),
                      policy == "evict_oldest" ? model::Forgetting::EvictOldest
                                               : model::Forgetting::None};
  }
  if (j.contains("learning_enabled")) {
    spec.learning_enabled = j.at("learning_enabled").get<bool>();
  }
  return spec;
}

guardian::Band parse_band(const Json& j, const std::string& path) {
  require_keys(j, {"lo", "hi", "set"}, path);
  guardian::Band band;
  if (j.contains("set")) {
    band.admissible = value_list_from_json(j.at("set"));
  }
  if (j.contains("lo") || j.contains("hi")) {
    if (!j.contains("lo") || !j.contains("hi")) {
      schema_error(path, "interval band needs both lo and hi");
    }
    band.interval = {j.at("lo").get<double>(), j.at("hi").get<double>()};
  }
  if (!band.valid()) schema_error(path, "band must give an interval or a set");
  return band;
}

sim::FaultSpec parse_fault(const Json& j, const std::string& path) {
  require_keys(j,
               {"target", "kind", "from", "until", "duration", "extra_latency",
                "channel", "value", "cases_per_tick"},
               path);
  sim::FaultSpec fault;
  fault.target = j.at("target").get<std::string>();
  std::string kind = j.at("kind").get<std::string>();
  fault.active_from = get_time(j, "from", 0, path);
  if (j.contains("until")) {
    fault.active_until = get_time(j, "until", 0, path);
  } else if (j.contains("duration")) {
    fault.active_until = fault.active_from + get_time(j, "duration", 0, path);
  } else {
    fault.active_until = fault.active_from + 1;
  }
  if (fault.active_from >= fault.active_until) {
    schema_error(path, "fault window must satisfy from < until");
  }
  if (kind == "crash") {
    fault.kind = sim::Crash{};
  } else if (kind == "hang") {
    fault.kind = sim::Hang{};
  } else if (kind == "delay") {
    fault.kind = sim::Delay{get_time(j, "extra_latency", 1, path)};
  } else if (kind == "corrupt_output") {
    sim::CorruptOutput c;
    c.channel = static_cast<std::size_t>(get_num(j, "channel", 0, path));
    if (j.contains("value") && j.at("value").is_string()) {
      c.replacement = j.at("value").get<std::string>();
    } else {
      c.replacement = get_num(j, "value", 0, path);
    }
    fault.kind = c;
  } else if (kind == "leak_growth") {
    fault.kind =
        sim::LeakGrowth{static_cast<std::uint32_t>(get_num(j, "cases_per_tick", 1, path))};
  } else {
    schema_error(path + ".kind", "unknown fault kind '" + kind + "'");
  }
  return fault;
}

}  // namespace

const ComponentSpec* Scenario::find_component(const ComponentId& id) const {
  for (const ComponentSpec& c : components) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

ComponentId Scenario::resolved_input_target() const {
  if (input_target) return *input_target;
  if (!redundancy.empty()) return redundancy.front().group_id;
  return components.front().id;
}

void Scenario::validate() const {
  if (schema_version != 1) {
    raise(Err::SchemaViolation, "scenario: unsupported schema_version");
  }
  if (components.empty()) raise(Err::SchemaViolation, "scenario: no components");
  if (duration == 0) raise(Err::SchemaViolation, "scenario: duration must be > 0");
  if (traffic.sample_period == 0) {
    raise(Err::SchemaViolation, "scenario: sample_period must be > 0");
  }
  if (function_deadline > traffic.sample_period) {
    raise(Err::SchemaViolation,
          "scenario: function_deadline must be <= sample_period");
  }
  if (failure_cost < 0) raise(Err::SchemaViolation, "scenario: failure_cost < 0");
  std::set<ComponentId> ids;
  for (const ComponentSpec& c : components) {
    if (!ids.insert(c.id).second) {
      raise(Err::SchemaViolation, "scenario: duplicate component id '" + c.id + "'");
    }
  }
  std::set<ComponentId> groups;
  for (const RedundancySpec& r : redundancy) {
    if (ids.count(r.group_id) || !groups.insert(r.group_id).second) {
      raise(Err::SchemaViolation, "scenario: group id '" + r.group_id + "' collides");
    }
    r.group.validate();
    for (const ComponentId& m : r.group.members) {
      if (!ids.count(m)) {
        raise(Err::SchemaViolation, "scenario: group member '" + m + "' unknown");
      }
    }
  }
  for (const ComponentId& t : supervision.targets) {
    if (!ids.count(t)) {
      raise(Err::SchemaViolation, "scenario: supervised component '" + t + "' unknown");
    }
  }
  if (guardian.enabled) {
    guardian.config.validate();
    if (supervision.mode == SupervisionSpec::Mode::None) {
      raise(Err::SchemaViolation,
            "scenario: guardian enabled but no supervision topology");
    }
    if (guardian.config.failover_target &&
        !ids.count(*guardian.config.failover_target)) {
      raise(Err::SchemaViolation, "scenario: failover target unknown");
    }
    for (const guardian::ProbeScheduleEntry& p : guardian.config.probe_schedule) {
      if (!ids.count(p.target)) {
        raise(Err::SchemaViolation, "scenario: probe target '" + p.target + "' unknown");
      }
    }
    for (const WatchdogSpec& w : guardian.watchdogs) {
      if (!ids.count(w.target)) {
        raise(Err::SchemaViolation, "scenario: watchdog target unknown");
      }
      demo::demo_plausibility(w.predicate);  // throws on unknown name
    }
  }
  for (const sim::FaultSpec& f : faults) {
    if (!ids.count(f.target)) {
      raise(Err::SchemaViolation, "scenario: fault target '" + f.target + "' unknown");
    }
  }
  if (input_target && !ids.count(*input_target) &&
      std::none_of(redundancy.begin(), redundancy.end(),
                   [&](const RedundancySpec& r) { return r.group_id == *input_target; })) {
    raise(Err::SchemaViolation, "scenario: input_target unknown");
  }
  for (const FeedbackEvent& fb : feedback) {
    bool known = ids.count(fb.target) ||
                 std::any_of(redundancy.begin(), redundancy.end(),
                             [&](const RedundancySpec& r) {
                               return r.group_id == fb.target;
                             });
    if (!known) {
      raise(Err::SchemaViolation, "scenario: feedback target '" + fb.target + "' unknown");
    }
  }
}

Scenario parse_scenario(const std::string& text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') ++line;
    }
    raise(Err::SchemaViolation,
          "scenario: JSON parse error at line " + std::to_string(line));
  }
  require_keys(root,
               {"schema_version", "seed", "duration", "function_deadline",
                "failure_cost", "bus_latency", "components", "topology", "guardian",
                "traffic", "feedback", "faults", "criticality", "input_target"},
               "$");
  Scenario s;
  if (!root.contains("schema_version")) {
    schema_error("$", "schema_version is required");
  }
  s.schema_version = root.at("schema_version").get<int>();
  s.seed = static_cast<std::uint64_t>(get_num(root, "seed", 1, "$"));
  s.duration = get_time(root, "duration", s.duration, "$");
  s.function_deadline = get_time(root, "function_deadline", s.function_deadline, "$");
  s.failure_cost = get_num(root, "failure_cost", s.failure_cost, "$");
  s.bus_latency = get_time(root, "bus_latency", s.bus_latency, "$");

  if (!root.contains("components")) schema_error("$", "components is required");
  std::size_t idx = 0;
  for (const Json& c : root.at("components")) {
    s.components.push_back(
        parse_component(c, "$.components[" + std::to_string(idx++) + "]"));
  }

  if (root.contains("topology")) {
    const Json& topo = root.at("topology");
    require_keys(topo, {"supervision", "redundancy"}, "$.topology");
    if (topo.contains("supervision")) {
      const Json& sup = topo.at("supervision");
      require_keys(sup, {"mode", "targets", "order"}, "$.topology.supervision");
      std::string mode = sup.contains("mode") ? sup.at("mode").get<std::string>() : "none";
      if (mode == "flat") {
        s.supervision.mode = SupervisionSpec::Mode::Flat;
        s.supervision.targets = sup.at("targets").get<std::vector<std::string>>();
      } else if (mode == "cascade") {
        s.supervision.mode = SupervisionSpec::Mode::Cascade;
        s.supervision.targets = sup.at("order").get<std::vector<std::string>>();
      } else if (mode != "none") {
        schema_error("$.topology.supervision.mode", "must be flat, cascade or none");
      }
    }
    if (topo.contains("redundancy")) {
      idx = 0;
      for (const Json& g : topo.at("redundancy")) {
        std::string path = "$.topology.redundancy[" + std::to_string(idx++) + "]";
        require_keys(g,
                     {"group_id", "mode", "members", "vote_tolerance", "sync_duration",
                      "reinit_period", "divergence_threshold"},
                     path);
        RedundancySpec spec;
        spec.group_id = g.at("group_id").get<std::string>();
        std::string mode = g.at("mode").get<std::string>();
        if (mode == "active_hot") {
          spec.group.mode = redundancy::RedundancyMode::ActiveHot;
        } else if (mode == "passive_cold") {
          spec.group.mode = redundancy::RedundancyMode::PassiveCold;
        } else if (mode == "tmr") {
          spec.group.mode = redundancy::RedundancyMode::TMR;
        } else if (mode == "reinitialized_copy") {
          spec.group.mode = redundancy::RedundancyMode::ReinitializedCopy;
        } else {
          schema_error(path + ".mode", "unknown redundancy mode");
        }
        spec.group.members = g.at("members").get<std::vector<std::string>>();
        spec.group.vote_tolerance = get_num(g, "vote_tolerance", 0.0, path);
        spec.group.sync_duration = get_time(g, "sync_duration", 0, path);
        spec.group.reinit_period = get_time(g, "reinit_period", 0, path);
        if (g.contains("divergence_threshold")) {
          spec.group.divergence_threshold =
              g.at("divergence_threshold").get<std::vector<double>>();
        }
        s.redundancy.push_back(std::move(spec));
      }
    }
  }

  if (root.contains("guardian")) {
    const Json& g = root.at("guardian");
    require_keys(g,
                 {"enabled", "ping_period", "response_deadline", "restart_duration",
                  "max_restarts", "failover_target", "monitor_period", "memory_budget",
                  "watchdogs", "probes"},
                 "$.guardian");
    s.guardian.enabled = g.contains("enabled") ? g.at("enabled").get<bool>() : true;
    s.guardian.config.ping_period =
        get_time(g, "ping_period", s.guardian.config.ping_period, "$.guardian");
    s.guardian.config.response_deadline = get_time(
        g, "response_deadline", s.guardian.config.response_deadline, "$.guardian");
    s.guardian.config.restart_duration = get_time(
        g, "restart_duration", s.guardian.config.restart_duration, "$.guardian");
    s.guardian.config.max_restarts = static_cast<int>(
        get_num(g, "max_restarts", s.guardian.config.max_restarts, "$.guardian"));
    if (g.contains("failover_target")) {
      s.guardian.config.failover_target = g.at("failover_target").get<std::string>();
    }
    s.guardian.config.monitor_period =
        get_time(g, "monitor_period", s.guardian.config.monitor_period, "$.guardian");
    s.guardian.config.memory_budget = static_cast<std::size_t>(get_num(
        g, "memory_budget", static_cast<double>(s.guardian.config.memory_budget),
        "$.guardian"));
    if (g.contains("watchdogs")) {
      for (const Json& w : g.at("watchdogs")) {
        require_keys(w, {"target", "predicate"}, "$.guardian.watchdogs[]");
        s.guardian.watchdogs.push_back({w.at("target").get<std::string>(),
                                        w.at("predicate").get<std::string>()});
      }
    }
    if (g.contains("probes")) {
      idx = 0;
      for (const Json& p : g.at("probes")) {
        std::string path = "$.guardian.probes[" + std::to_string(idx++) + "]";
        require_keys(p, {"id", "target", "at", "inputs", "band"}, path);
        guardian::ProbeScheduleEntry entry;
        entry.probe.probe_id = p.at("id").get<std::string>();
        entry.target = p.at("target").get<std::string>();
        entry.earliest = get_time(p, "at", 0, path);
        entry.probe.inputs = value_list_from_json(p.at("inputs"));
        if (p.contains("band")) {
          std::size_t b = 0;
          for (const Json& band : p.at("band")) {
            entry.probe.acceptance_band.push_back(
                parse_band(band, path + ".band[" + std::to_string(b++) + "]"));
          }
        }
        s.guardian.config.probe_schedule.push_back(std::move(entry));
      }
    }
  }

  if (root.contains("traffic")) {
    const Json& t = root.at("traffic");
    require_keys(t, {"sample_period", "generator", "trace"}, "$.traffic");
    s.traffic.sample_period =
        get_time(t, "sample_period", s.traffic.sample_period, "$.traffic");
    if (t.contains("generator")) {
      const Json& gen = t.at("generator");
      require_keys(gen,
                   {"ego_speed", "lead_gap0", "lead_speed", "rear_gap0", "rear_closing",
                    "occupied_windows", "noise"},
                   "$.traffic.generator");
      demo::TrafficGenSpec spec;
      spec.ego_speed = get_num(gen, "ego_speed", spec.ego_speed, "$.traffic.generator");
      spec.lead_gap0 = get_num(gen, "lead_gap0", spec.lead_gap0, "$.traffic.generator");
      spec.lead_speed =
          get_num(gen, "lead_speed", spec.lead_speed, "$.traffic.generator");
      spec.rear_gap0 = get_num(gen, "rear_gap0", spec.rear_gap0, "$.traffic.generator");
      spec.rear_closing =
          get_num(gen, "rear_closing", spec.rear_closing, "$.traffic.generator");
      if (gen.contains("occupied_windows")) {
        spec.occupied_windows = parse_windows(gen.at("occupied_windows"),
                                              "$.traffic.generator.occupied_windows");
      }
      spec.noise = get_num(gen, "noise", spec.noise, "$.traffic.generator");
      s.traffic.generator = spec;
    }
    if (t.contains("trace")) {
      for (const Json& row : t.at("trace")) {
        s.traffic.trace.push_back(value_list_from_json(row));
      }
    }
  }

  if (root.contains("feedback")) {
    for (const Json& fb : root.at("feedback")) {
      require_keys(fb, {"at", "target", "value"}, "$.feedback[]");
      s.feedback.push_back({fb.at("at").get<VirtualTime>(),
                            fb.at("target").get<std::string>(),
                            fb.at("value").get<double>()});
    }
  }

  if (root.contains("faults")) {
    idx = 0;
    for (const Json& f : root.at("faults")) {
      s.faults.push_back(parse_fault(f, "$.faults[" + std::to_string(idx++) + "]"));
    }
  }

  if (root.contains("criticality")) {
    s.criticality = parse_windows(root.at("criticality"), "$.criticality");
  }
  if (root.contains("input_target")) {
    s.input_target = root.at("input_target").get<std::string>();
  }

  s.validate();
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(Err::SchemaViolation, "scenario: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

}  // namespace vigil::scenario
