#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <gtest/gtest.h>

#include "auv/runner.hpp"

using namespace auv;

namespace {

LoadedRun load(const std::string& name, double duration) {
  const LoadResult r = load_run(std::string(AUV_SOURCE_DIR) + "/runs/" + name + ".json");
  if (!r.run) throw std::runtime_error("cannot load " + name);
  LoadedRun cfg = *r.run;
  cfg.run.duration = duration;
  return cfg;
}

}  // namespace

TEST(Runner, EmptyMissionIsDoneImmediately) {
  const RunArtifacts a = execute(load("empty", 30.0));
  EXPECT_EQ(a.report.end_reason, "done");
  EXPECT_EQ(a.report.exit_code, kExitDone);
  EXPECT_EQ(a.report.waypoint_count, 0u);
  EXPECT_TRUE(a.report.arrivals.empty());
  ASSERT_FALSE(a.rows.empty());
  EXPECT_LT(a.report.sim_time, 1.0);
}

TEST(Runner, InProcessRunIsByteDeterministic) {
  const LoadedRun cfg = load("square", 40.0);
  const RunArtifacts a = execute(cfg);
  const RunArtifacts b = execute(cfg);
  EXPECT_EQ(a.log_tsv, b.log_tsv);
  EXPECT_EQ(a.events_jsonl, b.events_jsonl);
  EXPECT_EQ(a.report_json, b.report_json);
  LoadedRun other = cfg;
  other.run.seed = cfg.run.seed + 1;
  EXPECT_NE(execute(other).log_tsv, a.log_tsv);
}

TEST(Runner, LogTimeStepIsTelemetryPeriod) {
  const LoadedRun cfg = load("square", 20.0);
  const RunArtifacts a = execute(cfg);
  ASSERT_GT(a.rows.size(), 100u);
  for (std::size_t i = 1; i < a.rows.size(); ++i) {
    ASSERT_GT(a.rows[i].t, a.rows[i - 1].t);
    ASSERT_NEAR(a.rows[i].t - a.rows[i - 1].t, 1.0 / cfg.run.telemetry_rate, 1e-9);
    ASSERT_EQ(a.rows[i].tick - a.rows[i - 1].tick,
              static_cast<std::int64_t>(std::llround(cfg.run.sim_rate / cfg.run.telemetry_rate)));
  }
}

TEST(Runner, ReportArrivalsMatchHoldTransitions) {
  const RunArtifacts a = execute(load("square", 80.0));
  std::vector<std::size_t> holds;
  for (std::size_t i = 1; i < a.rows.size(); ++i) {
    if (a.rows[i].phase == PilotPhase::kHold && a.rows[i - 1].phase != PilotPhase::kHold)
      holds.push_back(a.rows[i].waypoint_index);
  }
  ASSERT_EQ(holds.size(), a.report.arrivals.size());
  ASSERT_GE(holds.size(), 2u);
  for (std::size_t i = 0; i < holds.size(); ++i) EXPECT_EQ(a.report.arrivals[i].index, holds[i]);
}

TEST(Runner, ReplayReproducesReport) {
  const RunArtifacts a = execute(load("square", 60.0));
  const auto dir = std::filesystem::temp_directory_path() / ("auv_replay_" + std::to_string(::getpid()));
  write_artifacts(a, dir.string());
  EXPECT_TRUE(std::filesystem::exists(dir / "report.json"));
  EXPECT_EQ(report_json(replay(dir.string())), a.report_json);
  EXPECT_EQ(report_json(replay((dir / "log.tsv").string())), a.report_json);
  std::filesystem::remove_all(dir);
}

TEST(Runner, TimeoutExitCode) {
  const RunArtifacts a = execute(load("square", 10.0));
  EXPECT_EQ(a.report.end_reason, "timeout");
  EXPECT_EQ(a.report.exit_code, kExitTimeout);
}

TEST(Runner, TcpTransportSmoke) {
  LoadedRun cfg = load("square", 15.0);
  cfg.run.transport = Transport::kTcp;
  const RunArtifacts a = execute(cfg);
  EXPECT_EQ(a.report.transport, "tcp");
  EXPECT_FALSE(a.report.deterministic);
  EXPECT_GT(a.rows.size(), 100u);
  // The vehicle has left the start by the end of the window.
  EXPECT_GT(a.rows.back().truth_pose.position.x(), 1.0);
  EXPECT_EQ(a.rows.back().gateway_mode, GatewayMode::kAutonomous);
}
