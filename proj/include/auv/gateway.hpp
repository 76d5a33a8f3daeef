#pragma once

// Interpreter-node mode arbitration on the frontseat side.
//
// Mode table (commands from "backseat"; "operator" commands are always heard):
//
//   setpoint   | MANUAL | VELOCITY | POSITION | AUTONOMOUS
//   -----------+--------+----------+----------+-----------
//   velocity   |   -    |    x     |    -     |     x
//   position   |   -    |    -     |    x     |     x
//   wrench     |   -    |    -     |    -     |     x
//
// MANUAL ignores every backseat command. Requesting AUTONOMOUS requires the
// vehicle to be armed; disarming drops to MANUAL. When the backseat heartbeat
// is older than the watchdog timeout in AUTONOMOUS, the gateway falls back to
// POSITION hold at the current dead-reckoned pose.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "auv/control.hpp"
#include "auv/protocol.hpp"

namespace auv {

inline constexpr const char* kBackseatSource = "backseat";
inline constexpr const char* kFrontseatSource = "frontseat";
inline constexpr const char* kOperatorSource = "operator";

struct GatewayState {
  GatewayMode mode = GatewayMode::kManual;
  bool armed = false;
  std::map<std::string, double> last_heartbeat;
  double watchdog_timeout = 2.0;
  double autonomy_since = 0.0;
  /// Active setpoint in the frontseat (dead-reckoning) frame.
  std::optional<ControlSetpoint> setpoint;
  /// Frontseat DR frame -> backseat frame.
  Transform transform;
};

struct GatewayEvent {
  std::string kind;    // "mode", "ack", "watchdog", "transform", "ignored"
  std::string detail;
};

struct GatewayEffects {
  std::optional<Ack> ack;
  std::vector<GatewayEvent> events;
  std::optional<ControlSetpoint> forwarded;  // setpoint now driving the controller
};

struct ArbitrationResult {
  GatewayState state;
  GatewayEffects effects;
};

/// Pose level in roll/pitch, keeping the heading of the input.
Pose level_hold(const Pose& p);

ArbitrationResult arbitrate(const GatewayState& g, const Message& m, double t, const Pose& dr_pose);

/// Watchdog check, run once per frontseat tick.
ArbitrationResult check_watchdog(const GatewayState& g, double t, const Pose& dr_pose);

/// Converts a backseat-frame pose into the dead-reckoning frame.
Pose to_dr_frame(const GatewayState& g, const Pose& backseat_pose);

}  // namespace auv
