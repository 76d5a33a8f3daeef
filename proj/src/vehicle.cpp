#include "auv/vehicle.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/QR>

namespace auv {

std::vector<Thruster> heavy_frame_thrusters() {
  const double c = std::sqrt(0.5);
  const double max_thrust = 40.0;
  std::vector<Thruster> t;
  // Horizontal, vectored at 45 degrees, slightly below the CoG.
  t.push_back({{0.156, 0.111, 0.085}, {c, -c, 0.0}, max_thrust});
  t.push_back({{0.156, -0.111, 0.085}, {c, c, 0.0}, max_thrust});
  t.push_back({{-0.156, 0.111, 0.085}, {c, c, 0.0}, max_thrust});
  t.push_back({{-0.156, -0.111, 0.085}, {c, -c, 0.0}, max_thrust});
  // Vertical.
  t.push_back({{0.120, 0.218, 0.0}, {0.0, 0.0, 1.0}, max_thrust});
  t.push_back({{0.120, -0.218, 0.0}, {0.0, 0.0, 1.0}, max_thrust});
  t.push_back({{-0.120, 0.218, 0.0}, {0.0, 0.0, 1.0}, max_thrust});
  t.push_back({{-0.120, -0.218, 0.0}, {0.0, 0.0, 1.0}, max_thrust});
  return t;
}

VehicleParams default_vehicle() {
  VehicleParams p;
  p.mass = 11.5;
  p.inertia = Vec3(0.16, 0.16, 0.16).asDiagonal();
  p.added_mass << 5.5, 12.7, 14.57, 0.12, 0.12, 0.12;
  p.linear_damping << 4.03, 6.22, 5.18, 0.07, 0.07, 0.07;
  p.quadratic_damping << 18.18, 21.66, 36.99, 1.55, 1.55, 1.55;
  p.weight = p.mass * kGravity;
  p.buoyancy = p.weight + 2.0;
  p.cob_offset = Vec3(0.0, 0.0, -0.02);
  p.thrusters = heavy_frame_thrusters();
  return p;
}

Eigen::Matrix<double, 6, Eigen::Dynamic> allocation_matrix(const std::vector<Thruster>& thrusters) {
  Eigen::Matrix<double, 6, Eigen::Dynamic> b(6, static_cast<Eigen::Index>(thrusters.size()));
  for (std::size_t i = 0; i < thrusters.size(); ++i) {
    const auto& t = thrusters[i];
    b.col(static_cast<Eigen::Index>(i)) << t.axis, t.position.cross(t.axis);
  }
  return b;
}

int matrix_rank(const Eigen::Matrix<double, 6, Eigen::Dynamic>& m, double tol) {
  if (m.cols() == 0) return 0;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m);
  qr.setThreshold(tol);
  return static_cast<int>(qr.rank());
}

MixerMatrix mixer_matrix(const VehicleParams& params) {
  if (params.thrusters.size() != kThrusterCount) {
    throw SimError("mixer requires exactly 8 thrusters, got " +
                   std::to_string(params.thrusters.size()));
  }
  const auto b = allocation_matrix(params.thrusters);
  if (matrix_rank(b) < 6) throw SimError("thruster geometry has rank < 6");
  return b;
}

Wrench restoring_wrench(const Pose& pose, const VehicleParams& params) {
  const Mat3 r_t = pose.orientation.toRotationMatrix().transpose();
  const Vec3 gravity_body = r_t * Vec3(0.0, 0.0, params.weight);
  const Vec3 buoyancy_body = r_t * Vec3(0.0, 0.0, -params.buoyancy);
  return {gravity_body + buoyancy_body, params.cob_offset.cross(buoyancy_body)};
}

Mat6 mass_matrix(const VehicleParams& params) {
  Mat6 m = Mat6::Zero();
  m.topLeftCorner<3, 3>() = Mat3::Identity() * params.mass;
  m.bottomRightCorner<3, 3>() = params.inertia;
  m += params.added_mass.asDiagonal();
  return m;
}

namespace {

struct Derivative {
  Vec3 position_rate;
  Quat orientation_rate;  // stored as raw coefficients
  Vec6 nu_rate;
};

Vec6 thrust_wrench(const ThrustVector& thrust, const VehicleParams& params) {
  Vec6 tau = Vec6::Zero();
  for (std::size_t i = 0; i < params.thrusters.size() && i < kThrusterCount; ++i) {
    const auto& t = params.thrusters[i];
    const double f = thrust(static_cast<Eigen::Index>(i));
    tau.head<3>() += f * t.axis;
    tau.tail<3>() += f * t.position.cross(t.axis);
  }
  return tau;
}

}  // namespace

Vec6 body_acceleration(const Pose& pose, const Twist& twist, const ThrustVector& thrust,
                       const Environment& env, const VehicleParams& params) {
  const Mat3 r_t = pose.orientation.toRotationMatrix().transpose();
  const Vec3& v = twist.linear;
  const Vec3& w = twist.angular;
  const Vec3 v_rel = v - r_t * env.current;

  // Rigid-body Coriolis with the CoG at the body origin.
  const Vec3 p_rb = params.mass * v;
  const Vec3 h_rb = params.inertia * w;
  // Added-mass Coriolis on the relative velocity (Kirchhoff form).
  const Vec3 p_a = params.added_mass.head<3>().cwiseProduct(v_rel);
  const Vec3 h_a = params.added_mass.tail<3>().cwiseProduct(w);

  Vec6 coriolis;
  coriolis << w.cross(p_rb) + w.cross(p_a), w.cross(h_rb) + w.cross(h_a) + v_rel.cross(p_a);

  Vec6 nu_rel;
  nu_rel << v_rel, w;
  const Vec6 damping = params.linear_damping.cwiseProduct(nu_rel) +
                       params.quadratic_damping.cwiseProduct(nu_rel.cwiseAbs().cwiseProduct(nu_rel));

  const Vec6 tau = thrust_wrench(thrust, params) + restoring_wrench(pose, params).stacked();
  return mass_matrix(params).ldlt().solve(tau - coriolis - damping);
}

namespace {

Derivative derivative(const Pose& pose, const Twist& twist, const ThrustVector& thrust,
                      const Environment& env, const VehicleParams& params) {
  Derivative d;
  d.position_rate = pose.orientation * twist.linear;
  const Quat omega(0.0, twist.angular.x(), twist.angular.y(), twist.angular.z());
  d.orientation_rate.coeffs() = 0.5 * (pose.orientation * omega).coeffs();
  d.nu_rate = body_acceleration(pose, twist, thrust, env, params);
  return d;
}

struct Stage {
  Pose pose;
  Twist twist;
};

Stage advance(const Stage& s, const Derivative& d, double h) {
  Stage out;
  out.pose.position = s.pose.position + h * d.position_rate;
  out.pose.orientation.coeffs() = s.pose.orientation.coeffs() + h * d.orientation_rate.coeffs();
  out.pose.orientation = normalized(out.pose.orientation);
  out.twist = Twist::from(s.twist.stacked() + h * d.nu_rate);
  return out;
}

void clamp_norm(Vec3& v, double limit) {
  const double n = v.norm();
  if (n > limit) v *= limit / n;
}

}  // namespace

SimState step(const SimState& state, const ThrustVector& commanded, const Environment& env,
              const VehicleParams& params, double dt) {
  if (!(dt > 0.0 && dt <= 0.1)) throw SimError("dt must lie in (0, 0.1]");
  if (!is_finite(state.pose) || !is_finite(state.twist) || !std::isfinite(state.time) ||
      !state.thrust.allFinite()) {
    throw SimError("non-finite simulator state");
  }
  if (!commanded.allFinite()) throw SimError("non-finite thrust command");
  if (!env.current.allFinite()) throw SimError("non-finite current");

  ThrustVector target = commanded;
  for (std::size_t i = 0; i < kThrusterCount && i < params.thrusters.size(); ++i) {
    const double lim = params.thrusters[i].max_thrust;
    target(static_cast<Eigen::Index>(i)) = std::clamp(target(static_cast<Eigen::Index>(i)), -lim, lim);
  }
  ThrustVector realized = target;
  if (params.thruster_time_constant > 0.0) {
    const double decay = std::exp(-dt / params.thruster_time_constant);
    realized = target + (state.thrust - target) * decay;
  }

  const Stage s0{state.pose, state.twist};
  const Derivative k1 = derivative(s0.pose, s0.twist, realized, env, params);
  const Stage s1 = advance(s0, k1, 0.5 * dt);
  const Derivative k2 = derivative(s1.pose, s1.twist, realized, env, params);
  const Stage s2 = advance(s0, k2, 0.5 * dt);
  const Derivative k3 = derivative(s2.pose, s2.twist, realized, env, params);
  const Stage s3 = advance(s0, k3, dt);
  const Derivative k4 = derivative(s3.pose, s3.twist, realized, env, params);

  SimState next;
  next.pose.position = state.pose.position + dt / 6.0 *
      (k1.position_rate + 2.0 * k2.position_rate + 2.0 * k3.position_rate + k4.position_rate);
  next.pose.orientation.coeffs() = state.pose.orientation.coeffs() + dt / 6.0 *
      (k1.orientation_rate.coeffs() + 2.0 * k2.orientation_rate.coeffs() +
       2.0 * k3.orientation_rate.coeffs() + k4.orientation_rate.coeffs());
  next.pose.orientation = normalized(next.pose.orientation);
  next.twist = Twist::from(state.twist.stacked() + dt / 6.0 *
      (k1.nu_rate + 2.0 * k2.nu_rate + 2.0 * k3.nu_rate + k4.nu_rate));
  clamp_norm(next.twist.linear, params.max_linear_speed);
  clamp_norm(next.twist.angular, params.max_angular_rate);
  next.time = state.time + dt;
  next.thrust = realized;
  next.linear_accel = body_acceleration(next.pose, next.twist, realized, env, params).head<3>();
  return next;
}

double kinetic_energy(const Twist& twist, const VehicleParams& params) {
  const Vec6 nu = twist.stacked();
  return 0.5 * nu.dot(mass_matrix(params) * nu);
}

}  // namespace auv
