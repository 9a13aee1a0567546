#include "vigil/sim/event_log.hpp"

#include <sstream>

#include "vigil/errors.hpp"
#include "vigil/sim/fault.hpp"

namespace vigil::sim {

const char* kind_name(MessageKind k) {
  switch (k) {
    case MessageKind::Input: return "input";
    case MessageKind::Output: return "output";
    case MessageKind::Ping: return "ping";
    case MessageKind::Pong: return "pong";
    case MessageKind::Probe: return "probe";
    case MessageKind::ProbeResponse: return "probe_response";
    case MessageKind::Control: return "control";
  }
  return "unknown";
}

const char* fault_kind_name(const FaultKind& kind) {
  struct Namer {
    const char* operator()(const Crash&) const { return "crash"; }
    const char* operator()(const Hang&) const { return "hang"; }
    const char* operator()(const Delay&) const { return "delay"; }
    const char* operator()(const CorruptOutput&) const { return "corrupt_output"; }
    const char* operator()(const LeakGrowth&) const { return "leak_growth"; }
  };
  return std::visit(Namer{}, kind);
}

bool same_line(const Record& a, const Record& b) {
  return a.time == b.time && a.kind == b.kind && a.sender == b.sender &&
         a.receiver == b.receiver && a.is_test == b.is_test &&
         a.payload == b.payload;
}

void EventLog::append(Record rec) {
  rec.seq = next_seq_++;
  records_.push_back(std::move(rec));
}

std::string EventLog::record_line(const Record& rec) {
  Json line;
  line["time"] = rec.time;
  line["kind"] = rec.kind;
  line["sender"] = rec.sender;
  line["receiver"] = rec.receiver;
  line["is_test"] = rec.is_test;
  line["payload"] = to_json(rec.payload);
  return line.dump();
}

std::string EventLog::to_jsonl() const {
  std::ostringstream out;
  Record header;
  header.kind = tag::kRunHeader;
  header.sender = "kernel";
  header.payload = {std::to_string(seed_)};
  out << record_line(header) << '\n';
  for (const Record& rec : records_) {
    out << record_line(rec) << '\n';
  }
  return out.str();
}

EventLog EventLog::from_jsonl(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  EventLog log;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error&) {
      raise(Err::CorruptLog, "corrupt log line " + std::to_string(line_no));
    }
    if (!j.is_object() || !j.contains("time") || !j.contains("kind") ||
        !j.contains("sender") || !j.contains("receiver") ||
        !j.contains("is_test") || !j.contains("payload")) {
      raise(Err::CorruptLog, "corrupt log line " + std::to_string(line_no));
    }
    try {
      Record rec;
      rec.time = j.at("time").get<VirtualTime>();
      rec.kind = j.at("kind").get<std::string>();
      rec.sender = j.at("sender").get<std::string>();
      rec.receiver = j.at("receiver").get<std::string>();
      rec.is_test = j.at("is_test").get<bool>();
      rec.payload = value_list_from_json(j.at("payload"));
      if (rec.kind == tag::kRunHeader) {
        log.seed_ = std::stoull(str(rec.payload.at(0)));
        saw_header = true;
        continue;
      }
      log.append(std::move(rec));
    } catch (const SimError&) {
      raise(Err::CorruptLog, "corrupt log line " + std::to_string(line_no));
    } catch (const std::exception&) {
      raise(Err::CorruptLog, "corrupt log line " + std::to_string(line_no));
    }
  }
  if (line_no > 0 && !saw_header) {
    raise(Err::CorruptLog, "corrupt log line 1");
  }
  return log;
}

}  // namespace vigil::sim
