#pragma once

// Mission runner: wires frontseat and backseat through a transport, steps the
// stack until DONE, FAULT or the duration limit and produces the run logs.

#include <map>
#include <string>
#include <vector>

#include "auv/backseat.hpp"
#include "auv/config.hpp"
#include "auv/run_log.hpp"

namespace auv {

struct RunArtifacts {
  std::string log_tsv;
  std::string events_jsonl;
  std::string report_json;
  MissionReport report;
  std::vector<LogRow> rows;
  std::map<std::string, std::string> extra_files;  // planner trees when requested
  double wall_seconds = 0.0;
};

/// Runs a validated configuration. Everything stays in memory; nothing is
/// written to disk.
RunArtifacts execute(const LoadedRun& cfg);

/// Writes log.tsv, events.jsonl, report.json and any extra files into dir.
void write_artifacts(const RunArtifacts& a, const std::string& dir);

/// Operator console script issued at t = 0: arm, then request AUTONOMOUS.
std::string operator_startup_script();

}  // namespace auv
