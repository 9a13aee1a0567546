#include "vigil/testkit/coverage.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "vigil/errors.hpp"

namespace vigil::testkit {

Json CoverageReport::to_json() const {
  Json j;
  Json pts = Json::array();
  for (const PointStat& p : points) {
    pts.push_back({{"id", p.id}, {"executed", p.executed}});
  }
  j["points"] = pts;
  j["zero_hit"] = zero_hit;
  j["ratio"] = ratio;
  return j;
}

CoverageReport statement_coverage(std::span<const EventLog> logs, const DecisionMap& map) {
  std::map<std::string, std::uint64_t> hits;
  for (const EventLog& log : logs) {
    for (const sim::Record& rec : log.records()) {
      if (rec.kind != sim::tag::kDecision || rec.is_test) continue;
      if (rec.payload.empty() || !std::holds_alternative<std::string>(rec.payload[0])) {
        continue;
      }
      hits[str(rec.payload[0])] += 1;
    }
  }
  CoverageReport report;
  std::size_t covered = 0;
  for (const std::string& point : map.points) {
    std::uint64_t n = hits.count(point) ? hits.at(point) : 0;
    report.points.push_back({point, n});
    if (n > 0) {
      ++covered;
    } else {
      report.zero_hit.push_back(point);
    }
  }
  report.ratio = map.points.empty()
                     ? 0.0
                     : static_cast<double>(covered) / static_cast<double>(map.points.size());
  return report;
}

CoverageReport statement_coverage(const EventLog& log, const DecisionMap& map) {
  return statement_coverage(std::span<const EventLog>(&log, 1), map);
}

int grid_cell(const ParamGridSpec& grid, double value) {
  if (value < grid.lo || value > grid.hi || grid.cells <= 0) return -1;
  double width = (grid.hi - grid.lo) / grid.cells;
  if (width <= 0) return 0;
  int cell = static_cast<int>(std::floor((value - grid.lo) / width));
  return std::min(cell, grid.cells - 1);
}

Json ParamCoverage::to_json() const {
  Json j;
  j["name"] = grid.name;
  j["lo"] = grid.lo;
  j["hi"] = grid.hi;
  j["cells"] = grid.cells;
  int count = 0;
  Json cells = Json::array();
  for (bool v : visited) {
    cells.push_back(v);
    if (v) ++count;
  }
  j["visited"] = cells;
  j["visited_count"] = count;
  j["ratio"] = ratio;
  return j;
}

ParamCoverage param_coverage(std::span<const EventLog> logs, const ParamGridSpec& grid) {
  ParamCoverage cov;
  cov.grid = grid;
  cov.visited.assign(static_cast<std::size_t>(std::max(grid.cells, 0)), false);
  for (const EventLog& log : logs) {
    for (const sim::Record& rec : log.records()) {
      if (rec.kind != sim::tag::kParam || rec.is_test) continue;
      if (rec.payload.size() < 2 || !std::holds_alternative<std::string>(rec.payload[0]) ||
          !is_num(rec.payload[1])) {
        continue;
      }
      if (str(rec.payload[0]) != grid.name) continue;
      int cell = grid_cell(grid, num(rec.payload[1]));
      if (cell >= 0) cov.visited[static_cast<std::size_t>(cell)] = true;
    }
  }
  int count = static_cast<int>(std::count(cov.visited.begin(), cov.visited.end(), true));
  cov.ratio = grid.cells > 0 ? static_cast<double>(count) / grid.cells : 0.0;
  return cov;
}

ParamCoverage param_coverage(const EventLog& log, const ParamGridSpec& grid) {
  return param_coverage(std::span<const EventLog>(&log, 1), grid);
}

Json RiskReport::to_json() const {
  Json j;
  j["failures"] = failures;
  j["exposure_ticks"] = exposure_ticks;
  j["rate"] = rate;
  j["cost"] = cost;
  j["risk"] = risk;
  return j;
}

namespace {

std::uint64_t count_failures(const EventLog& log) {
  std::uint64_t n = 0;
  for (const sim::Record& rec : log.records()) {
    if (rec.kind != sim::tag::kVerdict) continue;
    if (!rec.payload.empty() && std::holds_alternative<std::string>(rec.payload[0]) &&
        str(rec.payload[0]) == "failure") {
      ++n;
    }
  }
  return n;
}

std::uint64_t log_exposure(const EventLog& log) {
  // Prefer the declared run duration; fall back to the last record time.
  for (const sim::Record& rec : log.records()) {
    if (rec.kind == sim::tag::kMeta && rec.payload.size() >= 2 &&
        std::holds_alternative<std::string>(rec.payload[0]) &&
        str(rec.payload[0]) == "duration" && is_num(rec.payload[1])) {
      return static_cast<std::uint64_t>(num(rec.payload[1]));
    }
  }
  return log.records().empty() ? 0 : log.records().back().time;
}

}  // namespace

RiskReport risk_report(std::span<const EventLog> logs, double cost,
                       std::span<const std::uint64_t> exposures) {
  if (cost < 0) raise(Err::SchemaViolation, "failure cost must be >= 0");
  RiskReport report;
  report.cost = cost;
  for (std::size_t i = 0; i < logs.size(); ++i) {
    report.failures += count_failures(logs[i]);
    report.exposure_ticks += i < exposures.size() ? exposures[i] : log_exposure(logs[i]);
  }
  report.rate = report.exposure_ticks == 0
                    ? 0.0
                    : static_cast<double>(report.failures) /
                          static_cast<double>(report.exposure_ticks);
  report.risk = report.rate * cost;
  return report;
}

RiskReport risk_report(std::span<const EventLog> logs, double cost) {
  return risk_report(logs, cost, {});
}

}  // namespace vigil::testkit
