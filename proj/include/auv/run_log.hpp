#pragma once

// Run outputs: log.tsv (one row per backseat tick), events.jsonl (one JSON
// object per event, the first one carrying run metadata) and report.json,
// which is computed from the other two so it can be regenerated offline.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "auv/frontseat.hpp"
#include "auv/pilot.hpp"
#include "auv/protocol.hpp"

namespace auv {

struct LogRow {
  std::int64_t tick = 0;
  double t = 0.0;
  Pose truth_pose;
  Twist truth_twist;
  Pose dr_pose;
  double dr_cov_h = 0.0;
  Pose fused_pose;
  double fused_cov_h = 0.0;
  bool estimator_valid = false;
  Transform transform;
  PilotPhase phase = PilotPhase::kIdle;
  std::size_t waypoint_index = 0;
  bool safety_hold = false;
  Vec3 setpoint_position = Vec3::Zero();
  double setpoint_yaw = 0.0;
  Wrench wrench;
  ThrustVector thrusts = ThrustVector::Zero();
  GatewayMode gateway_mode = GatewayMode::kManual;
  bool armed = false;
  double battery_voltage = 0.0;
  SensorCounters counters;
};

/// Column names in file order.
const std::vector<std::string>& log_columns();

void write_log_header(std::ostream& os);
void write_log_row(std::ostream& os, const LogRow& row);

class LogFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses a log written by write_log_*. Throws LogFormatError naming the
/// missing column or the offending line.
std::vector<LogRow> read_log(std::istream& is);

struct RunMeta {
  std::uint64_t seed = 0;
  std::string transport = "inprocess";
  bool deterministic = true;
  double sim_rate = 50.0;
  double telemetry_rate = 10.0;
  double duration = 0.0;
  std::string vehicle_path;
  std::string mission_path;
  std::vector<Waypoint> waypoints;
  double station_keeping_window = 120.0;
};

void write_meta_event(std::ostream& os, const RunMeta& meta);
void write_event(std::ostream& os, const LoggedEvent& e);

struct EventLog {
  RunMeta meta;
  std::vector<LoggedEvent> events;
};

EventLog read_events(std::istream& is);

struct WaypointArrival {
  std::size_t index = 0;
  double time = 0.0;
  double truth_distance = 0.0;      // ground truth to the waypoint at arrival
  double estimate_distance = 0.0;   // fused estimate to the waypoint at arrival
  double closest_truth_distance = 0.0;  // minimum over the waypoint's HOLD
  bool within_radius = false;       // closest_truth_distance <= acceptance radius
};

struct ErrorStats {
  double mean = 0.0;
  double rms = 0.0;
  double max = 0.0;
  double final = 0.0;
  double final_horizontal = 0.0;
};

struct StationKeeping {
  std::size_t waypoint_index = 0;
  double duration = 0.0;  // length of the evaluated window
  double rms = 0.0;       // ground truth to the waypoint
};

struct MissionReport {
  std::string final_phase;
  std::string end_reason;  // done | fault | timeout
  int exit_code = 0;
  std::uint64_t seed = 0;
  std::string transport;
  bool deterministic = true;
  double sim_time = 0.0;
  std::size_t rows = 0;
  std::size_t waypoint_count = 0;
  std::vector<WaypointArrival> arrivals;
  ErrorStats dr_error;
  ErrorStats fused_error;
  std::optional<StationKeeping> station_keeping;
  std::size_t gateway_events = 0;
  std::size_t watchdog_events = 0;
};

constexpr int kExitDone = 0;
constexpr int kExitFault = 2;
constexpr int kExitTimeout = 3;
constexpr int kExitConfig = 4;

MissionReport compute_report(const std::vector<LogRow>& rows, const EventLog& events);
std::string report_json(const MissionReport& r);

/// Reads log.tsv and events.jsonl from a run directory (or the directory of
/// the given file) and recomputes the report.
MissionReport replay(const std::string& path);

}  // namespace auv
