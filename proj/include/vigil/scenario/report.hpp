#pragma once

#include <string>

#include "vigil/sim/event_log.hpp"
#include "vigil/sim/kernel.hpp"
#include "vigil/values.hpp"

namespace vigil::scenario {

struct Runtime;

// Writes the self-describing meta records (duration, cadence, decision map,
// parameter grids, fault campaign) into the log at t=0 so every report is
// recomputable from the log alone.
void write_meta_records(sim::Kernel& sim, const Runtime& rt);

// Availability, verdict counts, risk, coverage, parameter coverage and crash
// detection latencies, all derived from the serialized record fields only.
Json compute_report(const sim::EventLog& log);

std::string render_table(const Json& report);

}  // namespace vigil::scenario
