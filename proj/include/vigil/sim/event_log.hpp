#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vigil/sim/message.hpp"

namespace vigil::sim {

// Record tags beyond the plain message kinds. Kept in one place because the
// offline report and several tests grep the log by these strings.
namespace tag {
inline constexpr const char* kRunHeader = "run_header";
inline constexpr const char* kMeta = "meta";
inline constexpr const char* kFaultOn = "fault_on";
inline constexpr const char* kFaultOff = "fault_off";
inline constexpr const char* kDrop = "drop";
inline constexpr const char* kRestartBegin = "restart_begin";
inline constexpr const char* kRestartComplete = "restart_complete";
inline constexpr const char* kFailoverOn = "failover_on";
inline constexpr const char* kFailoverOff = "failover_off";
inline constexpr const char* kVerdict = "verdict";
inline constexpr const char* kProbeDeferred = "probe_deferred";
inline constexpr const char* kFreezeCheck = "freeze_check";
inline constexpr const char* kDecision = "decision";
inline constexpr const char* kParam = "param";
inline constexpr const char* kSyncBegin = "sync_begin";
inline constexpr const char* kTakeover = "takeover";
inline constexpr const char* kAbandoned = "abandoned";
}  // namespace tag

// One line of the run log: a delivered message or a state-transition record.
// Only the six schema fields are serialized; seq and sent_at are in-memory
// bookkeeping for property checks.
struct Record {
  VirtualTime time = 0;
  std::uint64_t seq = 0;
  std::string kind;
  ComponentId sender;
  ComponentId receiver;
  bool is_test = false;
  ValueList payload;
  VirtualTime sent_at = 0;
};

bool same_line(const Record& a, const Record& b);

class EventLog {
 public:
  explicit EventLog(std::uint64_t seed = 0) : seed_(seed) {}

  void append(Record rec);
  const std::vector<Record>& records() const { return records_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t size() const { return records_.size(); }

  // Line-oriented JSON: a run_header line carrying the seed, then one record
  // per line with fields time, kind, sender, receiver, is_test, payload in
  // that order.
  std::string to_jsonl() const;
  static std::string record_line(const Record& rec);

  // Throws SimError(CorruptLog) naming the offending 1-based line.
  static EventLog from_jsonl(const std::string& text);

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t next_seq_ = 0;
  std::vector<Record> records_;
};

}  // namespace vigil::sim
