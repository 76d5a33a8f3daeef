#pragma once

// Frontseat computer: plant simulation, onboard sensors, dead reckoning, the
// interpreter gateway and the low-level controller. Talks to the outside only
// through protocol lines.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "auv/config.hpp"
#include "auv/gateway.hpp"

namespace auv {

struct LoggedEvent {
  double t = 0.0;
  std::string source;
  std::string kind;
  std::string detail;
};

struct SensorCounters {
  std::uint64_t imu = 0;
  std::uint64_t depth = 0;
  std::uint64_t dvl = 0;
  std::uint64_t dvl_lock = 0;
  std::uint64_t odom = 0;
  std::uint64_t gated = 0;  // updates rejected by a gate
};

/// State captured at a telemetry tick, before the plant is stepped.
struct FrontseatSnapshot {
  std::int64_t tick = 0;
  double t = 0.0;
  SimState truth;
  Pose dr_pose;
  Twist dr_twist;
  double dr_cov_h = 0.0;
  GatewayMode mode = GatewayMode::kManual;
  bool armed = false;
  Wrench wrench;
  ThrustVector thrust_cmd = ThrustVector::Zero();
  double battery_voltage = 0.0;
  SensorCounters counters;
};

class Frontseat {
 public:
  Frontseat(const VehicleConfig& cfg, const MissionSpec& mission, double sim_rate,
            double telemetry_rate, std::uint64_t seed);

  /// Bytes from the backseat link.
  void receive(std::string_view bytes) { backseat_in_.feed(bytes); }
  /// Bytes from the operator console.
  void receive_operator(std::string_view bytes) { operator_in_.feed(bytes); }

  /// Runs one simulator tick and returns the bytes for the backseat link.
  std::string step();

  /// True when the last step() published TELEMETRY; snapshot() then holds it.
  bool telemetry_sent() const { return telemetry_sent_; }
  const FrontseatSnapshot& snapshot() const { return snapshot_; }

  std::vector<LoggedEvent> take_events();

  const SimState& truth() const { return truth_; }
  const DeadReckoner& dead_reckoner() const { return dr_; }
  const GatewayState& gateway() const { return gateway_; }
  std::int64_t tick() const { return tick_; }
  double time() const { return time_of(tick_); }
  double time_of(std::int64_t k) const { return static_cast<double>(k) / sim_rate_; }

 private:
  void drain(MessageReader& reader, std::string& out);
  void apply(const ArbitrationResult& r);
  Twist dr_twist() const;
  ThrustVector control(Wrench& wrench);
  void event(std::string kind, std::string detail);

  VehicleConfig cfg_;
  Environment env_;
  double sim_rate_;
  double dt_;
  SensorSchedule imu_sched_, depth_sched_, dvl_sched_, telemetry_sched_;

  SimState truth_;
  ImuModel imu_;
  DvlModel dvl_;
  Rng imu_rng_, depth_rng_, dvl_rng_;
  DeadReckoner dr_;

  GatewayState gateway_;
  std::optional<SetpointMode> active_mode_;
  CascadedController controller_;
  Allocator allocator_;

  MessageReader backseat_in_, operator_in_;
  MessageWriter writer_{kFrontseatSource};

  double energy_used_wh_ = 0.0;
  bool last_lock_ = true;
  bool transform_logged_ = false;
  SensorCounters counters_;
  std::int64_t tick_ = 0;
  bool telemetry_sent_ = false;
  FrontseatSnapshot snapshot_;
  std::vector<LoggedEvent> events_;
};

}  // namespace auv
