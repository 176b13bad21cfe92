#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "eths/harness.hpp"

namespace eths {

inline constexpr int kSchemaVersion = 1;

// Scenario JSON. Missing fields keep reference defaults; unknown fields are rejected.
// base_dir resolves relative trace paths.
ScenarioConfig parse_scenario_text(const std::string& text, const std::string& base_dir = ".");
ScenarioConfig parse_scenario(const std::string& path);
std::string emit_scenario(const ScenarioConfig& cfg);

// tick,predicted_kw,observed_kw (observed column optional)
PvTrace read_pv_csv(std::istream& is);
PvTrace read_pv_csv_file(const std::string& path);
void write_pv_csv(const PvTrace& pv, std::ostream& os);

// One row per tick of [k0, k1] plus a closing row at k1+1 holding the end SOC and
// finished counts (flows are 0 there).
void write_schedule_csv(const Schedule& s, std::ostream& os);
Schedule read_schedule_csv(std::istream& is);
Schedule realized_schedule(const RunResult& run);
RunResult run_from_schedule(const Schedule& s);

void write_trigger_log_csv(const TriggerLog& log, std::ostream& os);

// Deterministic metrics record (no wall-clock quantities).
std::string metrics_json(const RunResult& run, const ViolationReport& report);
// Wall-clock quantities of a run.
std::string timing_json(const RunResult& run);
std::string summary_json(const MethodSummary& m, const std::vector<std::uint64_t>& seeds);
void write_comparison_csv(const ComparisonTable& t, std::ostream& os);

void write_gantt_svg(const Schedule& s, const std::vector<std::vector<int>>& down, std::ostream& os);
void write_gantt_text(const Schedule& s, const std::vector<std::vector<int>>& down, std::ostream& os);

// Base name of per-run artifacts, e.g. "eths_seed3".
std::string run_stem(const RunResult& run);

// Writes <stem>_schedule.csv, _metrics.json, _timing.json, _triggers.csv, _gantt.svg, _gantt.txt.
// Returns the paths written.
std::vector<std::string> emit_outputs(const RunResult& run, const PlantParameters& p, const std::string& out_dir);
// Writes compare_<label>_metrics.json per row and comparison.csv.
std::vector<std::string> emit_comparison(const ComparisonTable& t, const std::string& prefix, const std::string& out_dir);
// Offline schedule artifacts: offline_schedule.csv/.json, offline_gantt.svg/.txt; returns paths.
std::vector<std::string> emit_offline(const Schedule& s, const ViolationReport& report, const std::string& out_dir);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace eths
