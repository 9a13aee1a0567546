#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vigil/sim/event_log.hpp"

namespace vigil::testkit {

using sim::EventLog;

// Static enumeration of a component's instrumentable decision points. The
// executable side of the coverage ratio comes from here, never from runs.
struct DecisionMap {
  std::vector<std::string> points;
};

struct CoverageReport {
  struct PointStat {
    std::string id;
    std::uint64_t executed = 0;
  };
  std::vector<PointStat> points;
  std::vector<std::string> zero_hit;
  double ratio = 0.0;  // covered points / executable points

  Json to_json() const;
};

CoverageReport statement_coverage(const EventLog& log, const DecisionMap& map);
CoverageReport statement_coverage(std::span<const EventLog> logs, const DecisionMap& map);

// Equal-width partition of one adaptive scalar's declared range. A value on
// an interior cell boundary counts toward the upper cell; the last cell is
// closed at hi. Samples outside [lo, hi] mark nothing.
struct ParamGridSpec {
  std::string name;
  double lo = 0;
  double hi = 1;
  int cells = 10;
};

struct ParamCoverage {
  ParamGridSpec grid;
  std::vector<bool> visited;
  double ratio = 0.0;

  Json to_json() const;
};

int grid_cell(const ParamGridSpec& grid, double value);  // -1 when out of range
ParamCoverage param_coverage(const EventLog& log, const ParamGridSpec& grid);
ParamCoverage param_coverage(std::span<const EventLog> logs, const ParamGridSpec& grid);

// Observed failure rate times configured failure cost, over one or more runs.
struct RiskReport {
  std::uint64_t failures = 0;
  std::uint64_t exposure_ticks = 0;
  double rate = 0.0;
  double cost = 0.0;
  double risk = 0.0;

  Json to_json() const;
};

RiskReport risk_report(std::span<const EventLog> logs, double cost);
RiskReport risk_report(std::span<const EventLog> logs, double cost,
                       std::span<const std::uint64_t> exposures);

}  // namespace vigil::testkit
