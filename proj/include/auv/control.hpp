#pragma once

// Cascaded position/velocity control and thruster allocation.
//
// Outer loop: proportional pose error -> desired body twist.
// Inner loop: per-axis PID on body twist -> body wrench.

#include <array>
#include <variant>

#include "auv/vehicle.hpp"

namespace auv {

struct AxisPid {
  double kp = 0.0;
  double ki = 0.0;
  double kd = 0.0;
  double integrator_limit = 1.0;  // bound on the integral contribution, output units
  double output_limit = 1.0;
};

/// Axes ordered surge, sway, heave, roll, pitch, yaw.
using PidGains = std::array<AxisPid, 6>;

struct OuterLoopGains {
  Vec6 kp = Vec6::Zero();
  Vec3 max_linear_speed = Vec3::Constant(0.5);  // per body axis, m/s
  Vec3 max_angular_rate = Vec3::Constant(0.5);  // per body axis, rad/s
};

enum class SetpointMode { kPosition, kVelocity, kWrench };

const char* to_string(SetpointMode m);

/// Exactly one target, and the mode is whichever alternative is held.
struct ControlSetpoint {
  std::variant<Pose, Twist, Wrench> target = Pose{};

  SetpointMode mode() const { return static_cast<SetpointMode>(target.index()); }
  static ControlSetpoint position(const Pose& p) { return {p}; }
  static ControlSetpoint velocity(const Twist& t) { return {t}; }
  static ControlSetpoint wrench(const Wrench& w) { return {w}; }
};

Twist outer_loop(const Pose& pose_ref, const Pose& pose_est, const OuterLoopGains& gains);

/// Velocity PID with clamped integrator. The integrator is frozen while the
/// axis output is saturated in the direction of the error; the derivative acts
/// on the measurement only.
class VelocityPid {
 public:
  explicit VelocityPid(PidGains gains) : gains_(gains) {}

  Wrench update(const Twist& twist_ref, const Twist& twist_est, double dt);
  void reset();

  const Vec6& integrator() const { return integral_; }
  const PidGains& gains() const { return gains_; }

 private:
  PidGains gains_;
  Vec6 integral_ = Vec6::Zero();
  Vec6 last_measurement_ = Vec6::Zero();
  bool has_last_ = false;
};

struct ControlOutput {
  Wrench wrench;
  Twist twist_ref;  // commanded velocity, zero in wrench mode
};

/// Runs the loops required by the setpoint mode.
class CascadedController {
 public:
  CascadedController(OuterLoopGains outer, PidGains inner) : outer_(outer), inner_(inner) {}

  ControlOutput update(const ControlSetpoint& sp, const Pose& pose_est, const Twist& twist_est,
                       double dt);
  void reset() { inner_.reset(); }
  const VelocityPid& inner() const { return inner_; }

 private:
  OuterLoopGains outer_;
  VelocityPid inner_;
};

struct AllocationResult {
  ThrustVector thrusts = ThrustVector::Zero();
  double scale = 1.0;  // < 1 when the request was scaled down to fit the limits
  bool saturated() const { return scale < 1.0; }
};

/// Moore-Penrose allocation with direction-preserving saturation.
class Allocator {
 public:
  Allocator(const MixerMatrix& mixer, const ThrustVector& max_thrust);

  /// Throws std::invalid_argument for a non-finite wrench.
  AllocationResult allocate(const Wrench& w) const;

  const MixerMatrix& mixer() const { return mixer_; }
  const Eigen::Matrix<double, kThrusterCount, 6>& pseudo_inverse() const { return pinv_; }

 private:
  MixerMatrix mixer_;
  Eigen::Matrix<double, kThrusterCount, 6> pinv_;
  ThrustVector max_;
};

ThrustVector max_thrusts(const VehicleParams& params);

}  // namespace auv
