#pragma once

// Run, vehicle and mission configuration files (JSON, SI units).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "auv/control.hpp"
#include "auv/ekf.hpp"
#include "auv/pilot.hpp"
#include "auv/sensors.hpp"
#include "auv/vehicle.hpp"
#include "auv/world.hpp"

namespace auv {

struct Finding {
  std::string path;  // e.g. "mission.waypoints[2].position"
  std::string message;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<Finding> findings);
  const std::vector<Finding>& findings() const { return findings_; }

 private:
  std::vector<Finding> findings_;
};

struct SensorSuiteConfig {
  ImuNoiseParams imu;
  double imu_rate = 50.0;
  DepthNoiseParams depth;
  double depth_rate = 10.0;
  DvlNoiseParams dvl;
  double dvl_rate = 5.0;
  OdomDriftParams odom;
  double odom_rate = 2.0;
  bool odom_enabled = true;
};

struct ControlConfig {
  OuterLoopGains outer;
  PidGains inner;
};

struct AlignmentConfig {
  double smoothing = 0.2;
  double pairing_window = 0.05;
};

struct BatteryConfig {
  double full_voltage = 16.8;
  double empty_voltage = 13.2;
  double capacity_wh = 266.0;
  double hotel_power_w = 20.0;
  double power_per_newton_w = 7.0;
};

struct VehicleConfig {
  VehicleParams vehicle;
  SensorSuiteConfig sensors;
  EkfConfig ekf;
  ControlConfig control;
  PilotParams pilot;
  AlignmentConfig alignment;
  double watchdog_timeout = 2.0;
  BatteryConfig battery;
};

struct MissionSpec {
  Pose start;
  Environment environment;
  World world;
  Mission mission;
};

enum class Transport { kInProcess, kTcp };
enum class BackseatControl { kWrench, kVelocity, kPosition };

const char* to_string(Transport t);

struct RunConfig {
  std::string vehicle_path;
  std::string mission_path;
  std::uint64_t seed = 0;
  double duration = 0.0;
  Transport transport = Transport::kInProcess;
  std::string tcp_host = "127.0.0.1";
  int tcp_port = 0;  // 0 = pick a free port
  std::string log_dir = "out";
  double sim_rate = 50.0;
  double telemetry_rate = 10.0;  // also the backseat tick rate
  std::optional<bool> external_odometry;
  BackseatControl backseat_control = BackseatControl::kWrench;
  bool dump_tree = false;
};

struct LoadedRun {
  RunConfig run;
  VehicleConfig vehicle;
  MissionSpec mission;
};

/// Shipped defaults for the heavy-frame vehicle (mirrors config/bluerov2_heavy.json).
VehicleConfig default_vehicle_config();

/// Parsers collect findings instead of throwing; fields left out keep defaults.
VehicleConfig parse_vehicle_config(const std::string& json_text, std::vector<Finding>& findings,
                                   const std::string& prefix = "vehicle");
MissionSpec parse_mission(const std::string& json_text, std::vector<Finding>& findings,
                          const std::string& prefix = "mission");
RunConfig parse_run_config(const std::string& json_text, std::vector<Finding>& findings,
                           const std::string& prefix = "run");

struct LoadResult {
  std::optional<LoadedRun> run;
  std::vector<Finding> findings;
};

/// Reads a run file plus the vehicle and mission files it references (paths
/// relative to the run file). Parse and validation findings are combined.
LoadResult load_run(const std::string& run_path);

/// Semantic checks: unit sanity, geometry, mixer rank, waypoint bounds,
/// collision-free start, rates.
std::vector<Finding> validate_vehicle(const VehicleParams& v, const std::string& prefix = "vehicle");
std::vector<Finding> validate(const LoadedRun& cfg);

std::string read_file(const std::string& path);

}  // namespace auv
