#include <cmath>
#include <cstring>

#include <Eigen/SVD>
#include <gtest/gtest.h>

#include "auv/vehicle.hpp"

using namespace auv;

namespace {

int svd_rank(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  int r = 0;
  for (int i = 0; i < s.size(); ++i) r += s(i) > 1e-9 * s(0);
  return r;
}

// Neutral, level-stable-free vehicle: no restoring moments at all.
VehicleParams neutral_vehicle() {
  VehicleParams p = default_vehicle();
  p.buoyancy = p.weight;
  p.cob_offset = Vec3::Zero();
  return p;
}

bool bit_equal(const SimState& a, const SimState& b) {
  const auto same = [](const auto& x, const auto& y) {
    return std::memcmp(x.data(), y.data(), sizeof(double) * x.size()) == 0;
  };
  return same(a.pose.position, b.pose.position) &&
         same(a.pose.orientation.coeffs(), b.pose.orientation.coeffs()) &&
         same(a.twist.linear, b.twist.linear) && same(a.twist.angular, b.twist.angular) &&
         same(a.thrust, b.thrust);
}

}  // namespace

TEST(Mixer, SingleThrusterAtOrigin) {
  const auto b = allocation_matrix({Thruster{Vec3::Zero(), Vec3::UnitX(), 10.0}});
  Vec6 expected;
  expected << 1, 0, 0, 0, 0, 0;
  EXPECT_EQ(b.col(0), expected);
}

TEST(Mixer, SymmetricVerticalThrustersGivePureHeave) {
  std::vector<Thruster> t;
  for (double x : {-0.2, 0.2})
    for (double y : {-0.3, 0.3}) t.push_back({Vec3(x, y, 0.0), Vec3::UnitZ(), 40.0});
  const auto b = allocation_matrix(t);
  const Vec6 sum = b.rowwise().sum();
  EXPECT_DOUBLE_EQ(sum(2), 4.0);
  EXPECT_NEAR(sum.head<2>().norm(), 0.0, 1e-15);
  EXPECT_NEAR(sum.tail<3>().norm(), 0.0, 1e-15);
}

TEST(Mixer, DefaultGeometryHasRankSix) {
  const VehicleParams p = default_vehicle();
  const MixerMatrix b = mixer_matrix(p);
  EXPECT_EQ(svd_rank(b), 6);
  EXPECT_EQ(matrix_rank(b), 6);
}

TEST(Mixer, DefaultGeometryIsFourVerticalFourHorizontal) {
  int vertical = 0, horizontal = 0;
  for (const auto& t : heavy_frame_thrusters()) {
    EXPECT_NEAR(t.axis.norm(), 1.0, 1e-12);
    if (std::abs(t.axis.z()) > 0.999) ++vertical;
    if (std::abs(t.axis.z()) < 1e-12) ++horizontal;
  }
  EXPECT_EQ(vertical, 4);
  EXPECT_EQ(horizontal, 4);
}

TEST(Mixer, SevenThrustersRejected) {
  VehicleParams p = default_vehicle();
  p.thrusters.pop_back();
  EXPECT_THROW(mixer_matrix(p), SimError);
}

TEST(Mixer, DegenerateGeometryRejected) {
  // All thrusters vertical: no surge, sway or yaw authority.
  VehicleParams p = default_vehicle();
  for (auto& t : p.thrusters) t.axis = Vec3::UnitZ();
  EXPECT_LT(svd_rank(allocation_matrix(p.thrusters)), 6);
  EXPECT_THROW(mixer_matrix(p), SimError);
}

TEST(Restoring, NeutralLevelIsZero) {
  VehicleParams p = neutral_vehicle();
  const Wrench w = restoring_wrench(Pose{}, p);
  EXPECT_NEAR(w.stacked().norm(), 0.0, 1e-12);
}

TEST(Restoring, RollMomentOpposesRoll) {
  VehicleParams p = default_vehicle();
  p.buoyancy = 120.0;
  p.weight = 120.0;
  p.cob_offset = Vec3(0, 0, -0.05);  // above the CoG (z down)
  for (double roll : {M_PI / 2, 0.3, -0.3, -M_PI / 2}) {
    const Wrench w = restoring_wrench(Pose{Vec3::Zero(), quat_from_euler(roll, 0, 0)}, p);
    EXPECT_LT(w.torque.x() * roll, 0.0) << "roll " << roll;
  }
  const Wrench w = restoring_wrench(Pose{Vec3::Zero(), quat_from_euler(M_PI / 2, 0, 0)}, p);
  EXPECT_NEAR(w.torque.x(), -0.05 * 120.0, 1e-9);
}

TEST(Restoring, PositiveBuoyancyPushesUp) {
  VehicleParams p = neutral_vehicle();
  p.buoyancy = p.weight + 2.0;
  const Wrench w = restoring_wrench(Pose{}, p);
  EXPECT_NEAR((w.force - Vec3(0, 0, -2.0)).norm(), 0.0, 1e-12);
  EXPECT_NEAR(w.torque.norm(), 0.0, 1e-12);
}

TEST(Step, RestIsEquilibrium) {
  const VehicleParams p = neutral_vehicle();
  SimState s;
  s.pose.position = Vec3(1, 2, 3);
  SimState n = s;
  for (int i = 0; i < 100; ++i) n = step(n, ThrustVector::Zero(), Environment{}, p, 0.02);
  EXPECT_EQ(n.pose.position, s.pose.position);
  EXPECT_EQ(n.pose.orientation.coeffs(), s.pose.orientation.coeffs());
  EXPECT_EQ(n.twist.stacked(), Vec6::Zero());
  EXPECT_NEAR(n.time, 2.0, 1e-12);
}

TEST(Step, TerminalHeaveSpeedMatchesClosedForm) {
  VehicleParams p = neutral_vehicle();
  p.linear_damping.setZero();
  const double k = p.quadratic_damping(2);
  ThrustVector u = ThrustVector::Zero();
  for (int i = 4; i < 8; ++i) u(i) = 10.0;
  const double force = 40.0;
  SimState s;
  for (int i = 0; i < 3000; ++i) s = step(s, u, Environment{}, p, 0.02);
  const double expected = std::sqrt(force / k);
  EXPECT_NEAR(s.twist.linear.z(), expected, 0.01 * expected);
  EXPECT_NEAR(s.twist.angular.norm(), 0.0, 1e-9);
}

TEST(Step, Rk4AgreesWithFineEulerOracle) {
  VehicleParams p = default_vehicle();
  p.thruster_time_constant = 0.0;
  Environment env;
  env.current = Vec3(0.1, -0.05, 0.0);
  ThrustVector u;
  u << 8, -3, 5, 2, 4, 3, 2, 5;
  SimState init;
  init.twist.linear = Vec3(0.2, 0.0, 0.1);
  init.twist.angular = Vec3(0.05, -0.02, 0.1);

  SimState rk = init;
  for (int i = 0; i < 250; ++i) rk = step(rk, u, env, p, 0.02);

  // Explicit Euler on the same differential equation.
  Pose pose = init.pose;
  Twist tw = init.twist;
  const double h = 1e-5;
  for (int i = 0; i < 500000; ++i) {
    const Vec6 acc = body_acceleration(pose, tw, u, env, p);
    const Vec3 pdot = pose.orientation * tw.linear;
    const Quat omega(0.0, tw.angular.x(), tw.angular.y(), tw.angular.z());
    Quat q;
    q.coeffs() = pose.orientation.coeffs() + 0.5 * h * (pose.orientation * omega).coeffs();
    pose.orientation = q.normalized();
    pose.position += h * pdot;
    tw = Twist::from(tw.stacked() + h * acc);
  }
  EXPECT_LT((rk.pose.position - pose.position).norm(), 1e-3);
  EXPECT_LT(rk.pose.orientation.angularDistance(pose.orientation), 1e-3);
}

TEST(Step, WorldMomentumConservedWithoutDamping) {
  VehicleParams p = neutral_vehicle();
  p.linear_damping.setZero();
  p.quadratic_damping.setZero();
  SimState s;
  s.twist.linear = Vec3(0.5, -0.2, 0.1);
  s.twist.angular = Vec3(0.1, 0.2, -0.3);
  const auto momentum = [&](const SimState& st) {
    const Vec3 body = (Vec3::Constant(p.mass) + p.added_mass.head<3>()).cwiseProduct(st.twist.linear);
    return Vec3(st.pose.orientation * body);
  };
  const Vec3 m0 = momentum(s);
  for (int i = 0; i < 500; ++i) {
    s = step(s, ThrustVector::Zero(), Environment{}, p, 0.02);
    EXPECT_LT((momentum(s) - m0).norm(), 1e-6 * m0.norm()) << "step " << i;
  }
}

TEST(Step, DampingDissipatesEnergy) {
  const VehicleParams p = neutral_vehicle();
  SimState s;
  s.twist.linear = Vec3(1.0, -0.5, 0.3);
  s.twist.angular = Vec3(0.4, -0.2, 0.8);
  double e = kinetic_energy(s.twist, p);
  for (int i = 0; i < 1000; ++i) {
    s = step(s, ThrustVector::Zero(), Environment{}, p, 0.02);
    const double e_next = kinetic_energy(s.twist, p);
    EXPECT_LE(e_next, e) << "step " << i;
    e = e_next;
  }
  EXPECT_LT(e, 1e-3);
}

TEST(Step, DeterministicAndTimeInvariant) {
  const VehicleParams p = default_vehicle();
  ThrustVector u;
  u << 10, -5, 3, 7, -2, 4, 1, 0;
  SimState a, b, shifted;
  shifted.time = 1234.5;
  for (int i = 0; i < 200; ++i) {
    a = step(a, u, Environment{}, p, 0.02);
    b = step(b, u, Environment{}, p, 0.02);
    shifted = step(shifted, u, Environment{}, p, 0.02);
    ASSERT_TRUE(bit_equal(a, b));
    ASSERT_TRUE(bit_equal(a, shifted));
  }
}

TEST(Step, ThrustSaturatedAndLagged) {
  const VehicleParams p = default_vehicle();
  ThrustVector u = ThrustVector::Constant(1000.0);
  SimState s = step(SimState{}, u, Environment{}, p, 0.02);
  const double expected = 40.0 * (1.0 - std::exp(-0.02 / 0.1));
  EXPECT_NEAR(s.thrust(0), expected, 1e-12);
  for (int i = 0; i < 200; ++i) s = step(s, u, Environment{}, p, 0.02);
  EXPECT_LE(s.thrust.cwiseAbs().maxCoeff(), 40.0);
}

TEST(Step, RejectsBadInputs) {
  const VehicleParams p = default_vehicle();
  ThrustVector u = ThrustVector::Zero();
  EXPECT_THROW(step(SimState{}, u, Environment{}, p, 0.0), SimError);
  EXPECT_THROW(step(SimState{}, u, Environment{}, p, 0.2), SimError);
  u(3) = std::nan("");
  EXPECT_THROW(step(SimState{}, u, Environment{}, p, 0.02), SimError);
}

TEST(Step, CurrentCarriesDampedVehicle) {
  // Drag acts on relative velocity, so a passive vehicle drifts with the current.
  const VehicleParams p = neutral_vehicle();
  Environment env;
  env.current = Vec3(0.3, 0.0, 0.0);
  SimState s;
  for (int i = 0; i < 5000; ++i) s = step(s, ThrustVector::Zero(), env, p, 0.02);
  EXPECT_NEAR(s.twist.linear.x(), 0.3, 1e-3);
}
