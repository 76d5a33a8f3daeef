#pragma once

// Backseat computer: fused estimation from forwarded sensors plus external
// odometry, frame alignment against the frontseat DR frame, the waypoint
// pilot and its own cascaded controller. Runs one tick per TELEMETRY.

#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "auv/frame_alignment.hpp"
#include "auv/frontseat.hpp"

namespace auv {

struct BackseatSnapshot {
  double t = 0.0;
  Pose fused_pose;
  Twist fused_twist;
  double fused_cov_h = 0.0;
  bool estimator_valid = false;
  FrameAlignment alignment;
  PilotState pilot;
  ControlSetpoint setpoint;  // pilot output, backseat frame
  bool safety_hold = false;
  Wrench wrench;             // wrench computed by the backseat controller
  SensorCounters counters;
  std::uint64_t acks_rejected = 0;
};

class Backseat {
 public:
  /// tick_period is the nominal TELEMETRY spacing, used for the first tick.
  Backseat(const VehicleConfig& cfg, const MissionSpec& mission, BackseatControl control,
           std::uint64_t seed, double tick_period);

  void receive(std::string_view bytes) { in_.feed(bytes); }

  /// Side-channel sensor owned by the backseat. Readings must arrive in time order.
  void add_external_odom(const ExternalOdomReading& r) { odom_queue_.push_back(r); }

  /// Handles everything received so far. Each TELEMETRY runs one tick; the
  /// returned bytes are the replies for the frontseat.
  std::string process();

  /// Number of ticks run so far and the state after the most recent one.
  std::uint64_t ticks() const { return ticks_; }
  const BackseatSnapshot& snapshot() const { return snapshot_; }

  std::vector<LoggedEvent> take_events();
  std::vector<PlanResult> take_plans();

  const DeadReckoner& estimator() const { return fused_; }

 private:
  void fuse_odom_until(double t);
  void on_sensor(const SensorData& s, double t);
  void run_tick(const Telemetry& tel, double t, std::string& out);
  void event(double t, std::string kind, std::string detail);

  VehicleConfig cfg_;
  MissionSpec mission_;
  BackseatControl control_mode_;
  std::uint64_t seed_;
  double tick_period_;

  DeadReckoner fused_;
  std::deque<ExternalOdomReading> odom_queue_;
  FrameAlignment alignment_;
  PilotParams pilot_params_;
  PilotState pilot_;
  CascadedController controller_;

  MessageReader in_;
  MessageWriter writer_{kBackseatSource};
  std::uint64_t next_command_id_ = 1;

  std::optional<double> last_tick_time_;
  std::uint64_t ticks_ = 0;
  SensorCounters counters_;
  std::uint64_t acks_rejected_ = 0;
  BackseatSnapshot snapshot_;
  std::vector<LoggedEvent> events_;
  std::vector<PlanResult> plans_;
};

}  // namespace auv
