#include "auv/control.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace auv {

const char* to_string(SetpointMode m) {
  switch (m) {
    case SetpointMode::kPosition: return "position";
    case SetpointMode::kVelocity: return "velocity";
    case SetpointMode::kWrench: return "wrench";
  }
  return "unknown";
}

Twist outer_loop(const Pose& pose_ref, const Pose& pose_est, const OuterLoopGains& gains) {
  const Vec3 err_world = pose_ref.position - pose_est.position;
  const Vec3 err_body = pose_est.orientation.conjugate() * err_world;

  Twist out;
  out.linear = gains.kp.head<3>().cwiseProduct(err_body);
  // Scale the whole linear command so the direction toward the target survives saturation.
  double ratio = 1.0;
  for (int i = 0; i < 3; ++i) {
    ratio = std::max(ratio, std::abs(out.linear(i)) / gains.max_linear_speed(i));
  }
  out.linear /= ratio;

  const EulerAngles ref = euler_from_quat(pose_ref.orientation);
  const EulerAngles est = euler_from_quat(pose_est.orientation);
  const Vec3 att_err(wrap_angle(ref.roll - est.roll), wrap_angle(ref.pitch - est.pitch),
                     wrap_angle(ref.yaw - est.yaw));
  out.angular = gains.kp.tail<3>().cwiseProduct(att_err);
  out.angular = out.angular.cwiseMax(-gains.max_angular_rate).cwiseMin(gains.max_angular_rate);
  return out;
}

Wrench VelocityPid::update(const Twist& twist_ref, const Twist& twist_est, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("controller dt must be positive");
  const Vec6 ref = twist_ref.stacked();
  const Vec6 meas = twist_est.stacked();
  if (!has_last_) {
    last_measurement_ = meas;
    has_last_ = true;
  }
  Vec6 out;
  for (int i = 0; i < 6; ++i) {
    const AxisPid& g = gains_[static_cast<std::size_t>(i)];
    const double e = ref(i) - meas(i);
    const double d = -g.kd * (meas(i) - last_measurement_(i)) / dt;
    const double candidate = g.kp * e + integral_(i) + d;
    const bool saturated = std::abs(candidate) >= g.output_limit;
    const bool pushing_further = (candidate > 0.0) == (e > 0.0);
    if (!(saturated && pushing_further)) {
      integral_(i) = std::clamp(integral_(i) + g.ki * e * dt, -g.integrator_limit, g.integrator_limit);
    }
    out(i) = std::clamp(g.kp * e + integral_(i) + d, -g.output_limit, g.output_limit);
  }
  last_measurement_ = meas;
  return Wrench::from(out);
}

void VelocityPid::reset() {
  integral_.setZero();
  last_measurement_.setZero();
  has_last_ = false;
}

ControlOutput CascadedController::update(const ControlSetpoint& sp, const Pose& pose_est,
                                         const Twist& twist_est, double dt) {
  ControlOutput out;
  switch (sp.mode()) {
    case SetpointMode::kWrench:
      out.wrench = std::get<Wrench>(sp.target);
      return out;
    case SetpointMode::kVelocity:
      out.twist_ref = std::get<Twist>(sp.target);
      break;
    case SetpointMode::kPosition:
      out.twist_ref = outer_loop(std::get<Pose>(sp.target), pose_est, outer_);
      break;
  }
  out.wrench = inner_.update(out.twist_ref, twist_est, dt);
  return out;
}

Allocator::Allocator(const MixerMatrix& mixer, const ThrustVector& max_thrust)
    : mixer_(mixer), max_(max_thrust) {
  const Mat6 gram = mixer_ * mixer_.transpose();
  pinv_ = mixer_.transpose() * gram.inverse();
}

AllocationResult Allocator::allocate(const Wrench& w) const {
  if (!is_finite(w)) throw std::invalid_argument("non-finite wrench");
  AllocationResult res;
  res.thrusts = pinv_ * w.stacked();
  double worst = 1.0;
  for (Eigen::Index i = 0; i < res.thrusts.size(); ++i) {
    worst = std::max(worst, std::abs(res.thrusts(i)) / max_(i));
  }
  if (worst > 1.0) {
    res.scale = 1.0 / worst;
    res.thrusts /= worst;
    // Guard the last ulp so the limit holds exactly.
    for (Eigen::Index i = 0; i < res.thrusts.size(); ++i) {
      res.thrusts(i) = std::clamp(res.thrusts(i), -max_(i), max_(i));
    }
  }
  return res;
}

ThrustVector max_thrusts(const VehicleParams& params) {
  ThrustVector m = ThrustVector::Constant(1.0);
  for (std::size_t i = 0; i < params.thrusters.size() && i < kThrusterCount; ++i) {
    m(static_cast<Eigen::Index>(i)) = params.thrusters[i].max_thrust;
  }
  return m;
}

}  // namespace auv
