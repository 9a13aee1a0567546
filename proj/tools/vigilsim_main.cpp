#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vigil/scenario/report.hpp"
#include "vigil/scenario/runtime.hpp"
#include "vigil/scenario/scenario.hpp"
#include "vigil/testkit/coverage.hpp"

namespace fs = std::filesystem;
using namespace vigil;

namespace {

bool has_failure_verdict(const sim::EventLog& log) {
  for (const sim::Record& rec : log.records()) {
    if (rec.kind == sim::tag::kVerdict && !rec.payload.empty() &&
        std::holds_alternative<std::string>(rec.payload[0]) &&
        str(rec.payload[0]) == "failure") {
      return true;
    }
  }
  return false;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

std::optional<bool> parse_guardian_flag(const std::string& flag) {
  if (flag.empty()) return std::nullopt;
  if (flag == "on") return true;
  if (flag == "off") return false;
  throw SimError(Err::SchemaViolation, "--guardian must be on or off");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SimError(Err::SchemaViolation, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int cmd_run(const std::string& scenario_path, const std::string& out_dir,
            const std::string& guardian_flag, const std::string& format) {
  scenario::Scenario s = scenario::load_scenario(scenario_path);
  scenario::RunOutput out = scenario::run_scenario(s, std::nullopt,
                                                   parse_guardian_flag(guardian_flag));
  fs::create_directories(out_dir);
  write_file(fs::path(out_dir) / "events.jsonl", out.log.to_jsonl());
  write_file(fs::path(out_dir) / "report.json", out.report.dump(2) + "\n");
  if (format == "json") {
    std::cout << out.report.dump(2) << "\n";
  } else {
    std::cout << scenario::render_table(out.report);
  }
  return has_failure_verdict(out.log) ? 2 : 0;
}

int cmd_campaign(const std::string& scenario_path, const std::string& out_dir,
                 const std::vector<std::uint64_t>& seeds,
                 const std::string& guardian_flag, const std::string& format) {
  scenario::Scenario s = scenario::load_scenario(scenario_path);
  std::optional<bool> guardian_override = parse_guardian_flag(guardian_flag);
  fs::create_directories(out_dir);

  Json runs = Json::array();
  std::vector<sim::EventLog> logs;
  bool any_failure = false;
  for (std::uint64_t seed : seeds) {
    Json row;
    row["seed"] = seed;
    try {
      scenario::RunOutput out = scenario::run_scenario(s, seed, guardian_override);
      write_file(fs::path(out_dir) / ("run_" + std::to_string(seed) + ".jsonl"),
                 out.log.to_jsonl());
      row["availability"] = out.report["availability"]["ratio"];
      row["verdicts"] = out.report["verdicts"];
      row["failures"] = out.report["risk"]["failures"];
      row["detection"] = out.report["detection"];
      any_failure = any_failure || has_failure_verdict(out.log);
      logs.push_back(std::move(out.log));
    } catch (const SimError& e) {
      row["error"] = e.what();
    }
    runs.push_back(std::move(row));
  }

  Json aggregate;
  double mean_availability = 0;
  std::size_t ok_runs = 0;
  for (const Json& row : runs) {
    if (row.contains("availability")) {
      mean_availability += row["availability"].get<double>();
      ++ok_runs;
    }
  }
  aggregate["runs"] = runs.size();
  aggregate["failed_runs"] = runs.size() - ok_runs;
  aggregate["mean_availability"] = ok_runs == 0 ? 0.0 : mean_availability / ok_runs;
  aggregate["risk"] = testkit::risk_report(logs, s.failure_cost).to_json();

  Json campaign;
  campaign["scenario"] = scenario_path;
  campaign["runs"] = runs;
  campaign["aggregate"] = aggregate;
  write_file(fs::path(out_dir) / "campaign.json", campaign.dump(2) + "\n");
  if (format == "json") {
    std::cout << campaign.dump(2) << "\n";
  } else {
    std::cout << "campaign over " << runs.size() << " seeds: mean availability "
              << aggregate["mean_availability"].dump() << ", risk "
              << aggregate["risk"]["risk"].dump() << "\n";
  }
  return any_failure ? 2 : 0;
}

int cmd_report(const std::string& log_path, const std::string& format) {
  sim::EventLog log = sim::EventLog::from_jsonl(read_file(log_path));
  Json report = scenario::compute_report(log);
  if (format == "json") {
    std::cout << report.dump(2) << "\n";
  } else {
    std::cout << scenario::render_table(report);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic runtime-safeguard simulation harness"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir = "out", guardian_flag, format = "table";
  std::string log_path;
  std::vector<std::uint64_t> seeds;

  CLI::App* run = app.add_subcommand("run", "Run one scenario");
  run->add_option("--scenario", scenario_path, "Scenario file")->required();
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--guardian", guardian_flag, "Override guardian on|off");
  run->add_option("--format", format, "json|table");

  CLI::App* campaign = app.add_subcommand("campaign", "Run one scenario across seeds");
  campaign->add_option("--scenario", scenario_path, "Scenario file")->required();
  campaign->add_option("--seeds", seeds, "Seed list")->required()->delimiter(',');
  campaign->add_option("--out", out_dir, "Output directory");
  campaign->add_option("--guardian", guardian_flag, "Override guardian on|off");
  campaign->add_option("--format", format, "json|table");

  CLI::App* report = app.add_subcommand("report", "Recompute reports from a stored log");
  report->add_option("log", log_path, "Event log (jsonl)")->required();
  report->add_option("--format", format, "json|table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (run->parsed()) return cmd_run(scenario_path, out_dir, guardian_flag, format);
    if (campaign->parsed()) {
      return cmd_campaign(scenario_path, out_dir, seeds, guardian_flag, format);
    }
    if (report->parsed()) return cmd_report(log_path, format);
  } catch (const SimError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
