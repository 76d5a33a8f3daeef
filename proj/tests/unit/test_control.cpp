#include <cmath>
#include <random>

#include <Eigen/SVD>
#include <gtest/gtest.h>

#include "auv/config.hpp"
#include "auv/control.hpp"

using namespace auv;

namespace {

OuterLoopGains surge_gains(double kp, double limit) {
  OuterLoopGains g;
  g.kp = Vec6::Constant(kp);
  g.max_linear_speed = Vec3::Constant(limit);
  g.max_angular_rate = Vec3::Constant(limit);
  return g;
}

PidGains uniform_gains(double kp, double ki, double kd, double ilim, double olim) {
  PidGains g;
  for (auto& a : g) a = AxisPid{kp, ki, kd, ilim, olim};
  return g;
}

}  // namespace

TEST(OuterLoop, ZeroErrorZeroCommand) {
  const Pose p{Vec3(1, 2, 3), quat_from_euler(0.1, 0.0, 2.0)};
  const Twist t = outer_loop(p, p, surge_gains(0.5, 1.0));
  EXPECT_EQ(t.stacked(), Vec6::Zero());
}

TEST(OuterLoop, LinearRegionAndSaturation) {
  const Pose est{Vec3(0, 0, 5), quat_from_euler(0, 0, M_PI / 2)};
  const Vec3 ahead = est.orientation * Vec3::UnitX();
  Pose ref = est;
  ref.position = est.position + ahead;
  Twist t = outer_loop(ref, est, surge_gains(0.5, 1.0));
  EXPECT_NEAR(t.linear.x(), 0.5, 1e-12);
  EXPECT_NEAR(t.linear.tail<2>().norm(), 0.0, 1e-12);

  ref.position = est.position + 10.0 * ahead;
  t = outer_loop(ref, est, surge_gains(0.5, 1.0));
  EXPECT_NEAR(t.linear.x(), 1.0, 1e-12);
}

TEST(OuterLoop, YawErrorWraps) {
  const Pose est{Vec3::Zero(), quat_from_euler(0, 0, 3.0)};
  const Pose ref{Vec3::Zero(), quat_from_euler(0, 0, -3.0)};
  const Twist t = outer_loop(ref, est, surge_gains(0.1, 1.0));
  // Shortest way round is +0.283 rad, not -6 rad.
  EXPECT_NEAR(t.angular.z(), 0.1 * wrap_angle(-6.0), 1e-9);
  EXPECT_GT(t.angular.z(), 0.0);
}

TEST(InnerLoop, ZeroErrorZeroWrench) {
  VelocityPid pid(uniform_gains(10, 2, 1, 5, 50));
  const Twist t{Vec3(0.2, 0, 0), Vec3::Zero()};
  for (int i = 0; i < 10; ++i) EXPECT_EQ(pid.update(t, t, 0.1).stacked(), Vec6::Zero());
}

TEST(InnerLoop, PureProportional) {
  VelocityPid pid(uniform_gains(12.0, 0.0, 0.0, 5, 100));
  Twist ref;
  ref.linear = Vec3(0.3, -0.1, 0.05);
  ref.angular = Vec3(0.01, 0.02, -0.2);
  for (int i = 0; i < 5; ++i) {
    const Wrench w = pid.update(ref, Twist{}, 0.1);
    EXPECT_LT((w.stacked() - 12.0 * ref.stacked()).norm(), 1e-12);
  }
}

TEST(InnerLoop, ZeroGainsGiveZeroOutput) {
  VelocityPid pid(uniform_gains(0, 0, 0, 1, 1));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  for (int i = 0; i < 100; ++i) {
    const Twist a = Twist::from(Vec6::NullaryExpr([&] { return n(rng); }));
    const Twist b = Twist::from(Vec6::NullaryExpr([&] { return n(rng); }));
    EXPECT_EQ(pid.update(a, b, 0.1).stacked(), Vec6::Zero());
  }
}

TEST(InnerLoop, IntegratorBoundedAndFrozenWhenSaturated) {
  VelocityPid pid(uniform_gains(1.0, 5.0, 0.0, 2.0, 3.0));
  Twist ref;
  ref.linear.x() = 10.0;  // saturates immediately: kp*e = 10 > 3
  for (int i = 0; i < 100; ++i) {
    const Wrench w = pid.update(ref, Twist{}, 0.1);
    EXPECT_LE(std::abs(w.force.x()), 3.0);
    EXPECT_EQ(pid.integrator()(0), 0.0);
  }
  // Small error: integrator accumulates up to its limit and no further.
  VelocityPid small(uniform_gains(0.1, 5.0, 0.0, 2.0, 100.0));
  ref.linear.x() = 1.0;
  for (int i = 0; i < 1000; ++i) {
    small.update(ref, Twist{}, 0.1);
    ASSERT_LE(small.integrator().cwiseAbs().maxCoeff(), 2.0);
  }
  EXPECT_DOUBLE_EQ(small.integrator()(0), 2.0);
}

TEST(InnerLoop, DerivativeOnMeasurement) {
  VelocityPid pid(uniform_gains(0.0, 0.0, 2.0, 1.0, 100.0));
  Twist ref;
  pid.update(ref, Twist{}, 0.1);
  ref.linear.x() = 5.0;  // a setpoint step causes no derivative kick
  EXPECT_EQ(pid.update(ref, Twist{}, 0.1).force.x(), 0.0);
  Twist meas;
  meas.linear.x() = 0.1;
  EXPECT_NEAR(pid.update(ref, meas, 0.1).force.x(), -2.0 * 0.1 / 0.1, 1e-12);
}

TEST(InnerLoop, SurgeStepResponseWithDefaults) {
  const VehicleConfig cfg = default_vehicle_config();
  VelocityPid pid(cfg.control.inner);
  const Allocator alloc(mixer_matrix(cfg.vehicle), max_thrusts(cfg.vehicle));
  SimState s;
  s.pose.position = Vec3(0, 0, 5);
  const double ref = 0.3;
  Twist target;
  target.linear.x() = ref;
  double peak = 0.0, settle_time = 0.0;
  const double dt = 0.02;
  Wrench w;
  for (int k = 0; k < 1500; ++k) {
    w = pid.update(target, s.twist, dt);
    s = step(s, alloc.allocate(w).thrusts, Environment{}, cfg.vehicle, dt);
    const double u = s.twist.linear.x();
    peak = std::max(peak, u);
    if (std::abs(u - ref) > 0.05 * ref) settle_time = s.time;
  }
  EXPECT_LT(settle_time, 10.0);
  EXPECT_LT(peak, 1.2 * ref);
  EXPECT_NEAR(s.twist.linear.x(), ref, 0.05 * ref);
}

TEST(Allocation, ZeroWrenchZeroThrust) {
  const VehicleParams p = default_vehicle();
  const Allocator a(mixer_matrix(p), max_thrusts(p));
  EXPECT_EQ(a.allocate(Wrench{}).thrusts, ThrustVector::Zero());
}

TEST(Allocation, MatchesPseudoInverseOracle) {
  const VehicleParams p = default_vehicle();
  const MixerMatrix b = mixer_matrix(p);
  const Allocator a(b, max_thrusts(p));
  const Eigen::MatrixXd oracle = Eigen::MatrixXd(b).completeOrthogonalDecomposition().pseudoInverse();
  std::mt19937_64 rng(41);
  std::normal_distribution<double> n(0.0, 5.0);
  for (int i = 0; i < 1000; ++i) {
    Vec6 w = Vec6::NullaryExpr([&] { return n(rng); });
    w.tail<3>() *= 0.1;
    const auto r = a.allocate(Wrench::from(w));
    if (r.saturated()) continue;
    EXPECT_LT((b * r.thrusts - w).norm(), 1e-9);
    EXPECT_LT((r.thrusts - oracle * w).norm(), 1e-9);
  }
}

TEST(Allocation, SaturationPreservesDirection) {
  const VehicleParams p = default_vehicle();
  const MixerMatrix b = mixer_matrix(p);
  const ThrustVector max = max_thrusts(p);
  const Allocator a(b, max);
  Vec6 w;
  w << 30, 10, -20, 1, -2, 3;
  const ThrustVector raw = a.pseudo_inverse() * w;
  const double ratio = (raw.cwiseAbs().array() / max.array()).maxCoeff();
  w *= 2.0 / ratio;  // now one thruster would need exactly twice its limit
  const auto r = a.allocate(Wrench::from(w));
  EXPECT_TRUE(r.saturated());
  EXPECT_NEAR(r.scale, 0.5, 1e-12);
  const Vec6 realized = b * r.thrusts;
  EXPECT_LT((realized - 0.5 * w).norm(), 1e-9);
  EXPECT_NEAR(realized.normalized().dot(w.normalized()), 1.0, 1e-12);
  EXPECT_LE((r.thrusts.cwiseAbs().array() - max.array()).maxCoeff(), 0.0);
}

TEST(Allocation, NeverExceedsLimits) {
  const VehicleParams p = default_vehicle();
  const ThrustVector max = max_thrusts(p);
  const Allocator a(mixer_matrix(p), max);
  std::mt19937_64 rng(43);
  std::normal_distribution<double> n(0.0, 200.0);
  for (int i = 0; i < 20000; ++i) {
    const auto r = a.allocate(Wrench::from(Vec6::NullaryExpr([&] { return n(rng); })));
    ASSERT_TRUE(((r.thrusts.cwiseAbs().array() - max.array()) <= 0.0).all());
  }
}

TEST(Allocation, RejectsNonFinite) {
  const VehicleParams p = default_vehicle();
  const Allocator a(mixer_matrix(p), max_thrusts(p));
  Wrench w;
  w.force.x() = INFINITY;
  EXPECT_THROW(a.allocate(w), std::invalid_argument);
}

TEST(Cascade, ModesSelectLoops) {
  const VehicleConfig cfg = default_vehicle_config();
  CascadedController c(cfg.control.outer, cfg.control.inner);
  Wrench direct;
  direct.force = Vec3(1, 2, 3);
  const ControlOutput w = c.update(ControlSetpoint::wrench(direct), Pose{}, Twist{}, 0.1);
  EXPECT_EQ(w.wrench.stacked(), direct.stacked());
  EXPECT_EQ(w.twist_ref.stacked(), Vec6::Zero());

  Pose ref;
  ref.position = Vec3(1, 0, 0);
  const ControlOutput pos = c.update(ControlSetpoint::position(ref), Pose{}, Twist{}, 0.1);
  EXPECT_GT(pos.twist_ref.linear.x(), 0.0);
  EXPECT_GT(pos.wrench.force.x(), 0.0);
  EXPECT_EQ(ControlSetpoint::velocity(Twist{}).mode(), SetpointMode::kVelocity);
}
