#pragma once

// Coordinate frames and SE(3) helpers shared by the whole stack.
//
// World frame is a local North-East-Down tangent plane (z positive down, so
// depth == +z). Body frame is forward-starboard-down. Quaternions are
// Hamilton, body-to-world. Everything is SI: metres, seconds, radians.

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace auv {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Quat = Eigen::Quaterniond;

struct Pose {
  Vec3 position = Vec3::Zero();
  Quat orientation = Quat::Identity();
};

/// Body-frame velocities.
struct Twist {
  Vec3 linear = Vec3::Zero();
  Vec3 angular = Vec3::Zero();

  Vec6 stacked() const {
    Vec6 v;
    v << linear, angular;
    return v;
  }
  static Twist from(const Vec6& v) { return {v.head<3>(), v.tail<3>()}; }
};

/// Body-frame generalized force.
struct Wrench {
  Vec3 force = Vec3::Zero();
  Vec3 torque = Vec3::Zero();

  Vec6 stacked() const {
    Vec6 v;
    v << force, torque;
    return v;
  }
  static Wrench from(const Vec6& v) { return {v.head<3>(), v.tail<3>()}; }
};

/// Rigid transform x' = rotation * x + translation.
struct Transform {
  Quat rotation = Quat::Identity();
  Vec3 translation = Vec3::Zero();

  static Transform identity() { return {}; }
  static Transform from_pose(const Pose& p) { return {p.orientation, p.position}; }
};

struct EulerAngles {
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;
};

/// a ∘ b: applies b first, then a.
Transform compose(const Transform& a, const Transform& b);
Transform inverse(const Transform& t);
Pose apply(const Transform& t, const Pose& p);
Vec3 apply(const Transform& t, const Vec3& point);

/// Wraps into (-pi, pi].
double wrap_angle(double theta);

/// ZYX (yaw-pitch-roll) convention.
Quat quat_from_euler(double roll, double pitch, double yaw);
EulerAngles euler_from_quat(const Quat& q);
double yaw_of(const Quat& q);

/// Rotation-vector exponential / logarithm on unit quaternions.
Quat quat_exp(const Vec3& rotation_vector);
Vec3 quat_log(const Quat& q);

Mat3 skew(const Vec3& v);

/// Returns q scaled to unit norm; identity for a degenerate input.
Quat normalized(const Quat& q);

bool is_finite(const Pose& p);
bool is_finite(const Twist& t);
bool is_finite(const Wrench& w);

}  // namespace auv
