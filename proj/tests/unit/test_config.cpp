#include <algorithm>

#include <gtest/gtest.h>

#include "auv/config.hpp"
#include "auv/runner.hpp"

using namespace auv;

namespace {

const std::string kRoot = AUV_SOURCE_DIR;

bool has_finding(const std::vector<Finding>& f, const std::string& path_part) {
  return std::any_of(f.begin(), f.end(), [&](const Finding& x) { return x.path.find(path_part) != std::string::npos; });
}

std::string dump(const std::vector<Finding>& f) {
  std::string s;
  for (const auto& x : f) s += x.path + ": " + x.message + "\n";
  return s;
}

}  // namespace

TEST(Config, ShippedRunsValidateClean) {
  for (const char* name : {"square", "wall_gap", "survey", "empty"}) {
    const LoadResult r = load_run(kRoot + "/runs/" + name + ".json");
    EXPECT_TRUE(r.findings.empty()) << name << "\n" << dump(r.findings);
    EXPECT_TRUE(r.run.has_value()) << name;
  }
}

TEST(Config, ShippedVehicleMatchesBuiltInDefaults) {
  std::vector<Finding> f;
  const VehicleConfig file = parse_vehicle_config(read_file(kRoot + "/config/bluerov2_heavy.json"), f);
  ASSERT_TRUE(f.empty()) << dump(f);
  const VehicleConfig def = default_vehicle_config();
  EXPECT_EQ(file.vehicle.mass, def.vehicle.mass);
  EXPECT_DOUBLE_EQ(file.vehicle.buoyancy, def.vehicle.buoyancy);  // built in as weight + 2
  ASSERT_EQ(file.vehicle.thrusters.size(), def.vehicle.thrusters.size());
  for (std::size_t i = 0; i < def.vehicle.thrusters.size(); ++i) {
    EXPECT_EQ(file.vehicle.thrusters[i].position, def.vehicle.thrusters[i].position);
    EXPECT_EQ(file.vehicle.thrusters[i].axis, def.vehicle.thrusters[i].axis);
  }
  EXPECT_EQ(file.ekf.gate_odom, def.ekf.gate_odom);
  EXPECT_EQ(file.control.inner[0].kp, def.control.inner[0].kp);
}

TEST(Config, WaypointFindingsNameTheIndex) {
  const LoadResult r = load_run(kRoot + "/tests/fixtures/run_bad_waypoint.json");
  EXPECT_FALSE(r.run);
  EXPECT_TRUE(has_finding(r.findings, "mission.waypoints[1].position")) << dump(r.findings);
  EXPECT_TRUE(has_finding(r.findings, "mission.waypoints[2].position")) << dump(r.findings);
  EXPECT_FALSE(has_finding(r.findings, "mission.waypoints[0]")) << dump(r.findings);
}

TEST(Config, SevenThrustersRejected) {
  const LoadResult r = load_run(kRoot + "/tests/fixtures/run_seven_thrusters.json");
  EXPECT_FALSE(r.run);
  EXPECT_TRUE(has_finding(r.findings, "thrusters")) << dump(r.findings);
}

TEST(Config, DegenerateGeometryRejected) {
  VehicleParams v = default_vehicle();
  for (auto& t : v.thrusters) t.axis = Vec3::UnitZ();
  const auto f = validate_vehicle(v);
  ASSERT_FALSE(f.empty());
  EXPECT_NE(f.back().message.find("rank"), std::string::npos);
}

TEST(Config, MissingSeedReported) {
  const LoadResult r = load_run(kRoot + "/tests/fixtures/run_missing_seed.json");
  EXPECT_FALSE(r.run);
  EXPECT_TRUE(has_finding(r.findings, "run.seed")) << dump(r.findings);
}

TEST(Config, MissingFileReported) {
  const LoadResult r = load_run(kRoot + "/tests/fixtures/nope.json");
  ASSERT_EQ(r.findings.size(), 1u);
  EXPECT_EQ(r.findings[0].path, "run");
}

TEST(Config, ParserCollectsTypeErrors) {
  std::vector<Finding> f;
  parse_run_config(R"({"vehicle": 3, "mission": "m.json", "seed": -1, "duration": "long"})", f);
  EXPECT_TRUE(has_finding(f, "run.vehicle")) << dump(f);
  EXPECT_TRUE(has_finding(f, "run.seed")) << dump(f);
  EXPECT_TRUE(has_finding(f, "run.duration")) << dump(f);
  f.clear();
  parse_mission("{not json", f);
  EXPECT_EQ(f.size(), 1u);
}

TEST(Config, ExecuteRefusesInvalidConfig) {
  LoadResult r = load_run(kRoot + "/runs/square.json");
  ASSERT_TRUE(r.run);
  LoadedRun cfg = *r.run;
  cfg.mission.mission.waypoints[0].position = Vec3(500, 0, 5);
  try {
    execute(cfg);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_TRUE(has_finding(e.findings(), "mission.waypoints[0].position"));
    EXPECT_NE(std::string(e.what()).find("waypoints[0]"), std::string::npos);
  }
}
