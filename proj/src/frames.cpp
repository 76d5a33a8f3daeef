#include "auv/frames.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace auv {

Quat normalized(const Quat& q) {
  const double n = q.norm();
  if (!(n > 1e-12) || !std::isfinite(n)) return Quat::Identity();
  return Quat(q.w() / n, q.x() / n, q.y() / n, q.z() / n);
}

Transform compose(const Transform& a, const Transform& b) {
  return {normalized(a.rotation * b.rotation), a.rotation * b.translation + a.translation};
}

Transform inverse(const Transform& t) {
  const Quat inv = t.rotation.conjugate();
  return {inv, -(inv * t.translation)};
}

Pose apply(const Transform& t, const Pose& p) {
  return {t.rotation * p.position + t.translation, normalized(t.rotation * p.orientation)};
}

Vec3 apply(const Transform& t, const Vec3& point) { return t.rotation * point + t.translation; }

double wrap_angle(double theta) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::remainder(theta, two_pi);
  if (r <= -std::numbers::pi) r = std::numbers::pi;
  return r;
}

Quat quat_from_euler(double roll, double pitch, double yaw) {
  const Quat q = Eigen::AngleAxisd(yaw, Vec3::UnitZ()) * Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
                 Eigen::AngleAxisd(roll, Vec3::UnitX());
  return normalized(q);
}

EulerAngles euler_from_quat(const Quat& q) {
  const Quat n = normalized(q);
  const double w = n.w(), x = n.x(), y = n.y(), z = n.z();
  EulerAngles e;
  e.roll = std::atan2(2.0 * (w * x + y * z), 1.0 - 2.0 * (x * x + y * y));
  const double s = std::clamp(2.0 * (w * y - z * x), -1.0, 1.0);
  e.pitch = std::asin(s);
  e.yaw = std::atan2(2.0 * (w * z + x * y), 1.0 - 2.0 * (y * y + z * z));
  return e;
}

double yaw_of(const Quat& q) { return euler_from_quat(q).yaw; }

Quat quat_exp(const Vec3& rv) {
  const double angle = rv.norm();
  if (angle < 1e-12) {
    // Second-order expansion keeps the map smooth through zero.
    return normalized(Quat(1.0, 0.5 * rv.x(), 0.5 * rv.y(), 0.5 * rv.z()));
  }
  const double s = std::sin(0.5 * angle) / angle;
  return Quat(std::cos(0.5 * angle), s * rv.x(), s * rv.y(), s * rv.z());
}

Vec3 quat_log(const Quat& q_in) {
  Quat q = normalized(q_in);
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  const Vec3 v(q.x(), q.y(), q.z());
  const double sn = v.norm();
  if (sn < 1e-12) return 2.0 * v;
  const double angle = 2.0 * std::atan2(sn, q.w());
  return v * (angle / sn);
}

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

bool is_finite(const Pose& p) {
  return p.position.allFinite() && p.orientation.coeffs().allFinite();
}

bool is_finite(const Twist& t) { return t.linear.allFinite() && t.angular.allFinite(); }

bool is_finite(const Wrench& w) { return w.force.allFinite() && w.torque.allFinite(); }

}  // namespace auv
