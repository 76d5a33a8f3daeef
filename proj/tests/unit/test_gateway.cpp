#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "auv/gateway.hpp"

using namespace auv;

namespace {

Message command(const std::string& src, std::uint64_t id, decltype(Command::body) body) {
  return Message{{src, id, 0.0}, Command{id, std::move(body)}};
}

Message heartbeat(const std::string& src, std::uint64_t seq) { return Message{{src, seq, 0.0}, Heartbeat{}}; }

GatewayState autonomous(double t) {
  GatewayState g;
  const Pose p;
  g = arbitrate(g, command(kOperatorSource, 1, Arm{}), t, p).state;
  g = arbitrate(g, command(kOperatorSource, 2, ModeRequest{GatewayMode::kAutonomous}), t, p).state;
  return g;
}

bool has_event(const GatewayEffects& fx, const std::string& kind) {
  for (const auto& e : fx.events) {
    if (e.kind == kind) return true;
  }
  return false;
}

}  // namespace

TEST(Gateway, ModeTableRejectsWrongSetpointType) {
  GatewayState g;
  g = arbitrate(g, command(kOperatorSource, 1, ModeRequest{GatewayMode::kPosition}), 0, Pose{}).state;
  ASSERT_EQ(g.mode, GatewayMode::kPosition);

  auto r = arbitrate(g, command(kBackseatSource, 2, Twist{Vec3(0.3, 0, 0), Vec3::Zero()}), 1, Pose{});
  ASSERT_TRUE(r.effects.ack);
  EXPECT_FALSE(r.effects.ack->accepted);
  EXPECT_EQ(r.effects.ack->reason, "mode");
  EXPECT_EQ(r.effects.ack->command_id, 2u);
  EXPECT_FALSE(r.effects.forwarded);

  r = arbitrate(g, command(kBackseatSource, 3, Pose{Vec3(1, 2, 3), Quat::Identity()}), 1, Pose{});
  EXPECT_TRUE(r.effects.ack->accepted);
  ASSERT_TRUE(r.effects.forwarded);
  EXPECT_EQ(r.effects.forwarded->mode(), SetpointMode::kPosition);

  r = arbitrate(g, command(kBackseatSource, 4, Wrench{}), 1, Pose{});
  EXPECT_FALSE(r.effects.ack->accepted);
}

TEST(Gateway, FullModeTable) {
  const decltype(Command::body) bodies[] = {Twist{}, Pose{}, Wrench{}};
  // rows: MANUAL, VELOCITY, POSITION, AUTONOMOUS; columns: velocity, position, wrench
  const bool table[4][3] = {{false, false, false}, {true, false, false}, {false, true, false}, {true, true, true}};
  for (int m = 0; m < 4; ++m) {
    GatewayState g;
    g.armed = true;
    g = arbitrate(g, command(kOperatorSource, 1, ModeRequest{static_cast<GatewayMode>(m)}), 0, Pose{}).state;
    ASSERT_EQ(static_cast<int>(g.mode), m);
    for (int c = 0; c < 3; ++c) {
      const auto r = arbitrate(g, command(kBackseatSource, 10 + c, bodies[c]), 0.5, Pose{});
      ASSERT_TRUE(r.effects.ack);
      EXPECT_EQ(r.effects.ack->accepted, table[m][c]) << "mode " << m << " setpoint " << c;
    }
  }
}

TEST(Gateway, AutonomousRequiresArming) {
  GatewayState g;
  auto r = arbitrate(g, command(kOperatorSource, 1, ModeRequest{GatewayMode::kAutonomous}), 0, Pose{});
  EXPECT_FALSE(r.effects.ack->accepted);
  EXPECT_EQ(r.effects.ack->reason, "unarmed");
  EXPECT_EQ(r.state.mode, GatewayMode::kManual);

  g = arbitrate(g, command(kOperatorSource, 2, Arm{}), 0, Pose{}).state;
  EXPECT_TRUE(g.armed);
  r = arbitrate(g, command(kOperatorSource, 3, ModeRequest{GatewayMode::kAutonomous}), 0, Pose{});
  EXPECT_TRUE(r.effects.ack->accepted);
  EXPECT_EQ(r.state.mode, GatewayMode::kAutonomous);
  EXPECT_TRUE(has_event(r.effects, "mode"));
}

TEST(Gateway, ManualIgnoresBackseat) {
  GatewayState g;
  g.armed = true;
  for (const decltype(Command::body)& b :
       {decltype(Command::body){ModeRequest{GatewayMode::kAutonomous}}, decltype(Command::body){Twist{}},
        decltype(Command::body){Arm{}}}) {
    const auto r = arbitrate(g, command(kBackseatSource, 1, b), 0, Pose{});
    EXPECT_FALSE(r.effects.ack->accepted);
    EXPECT_EQ(r.state.mode, GatewayMode::kManual);
    EXPECT_FALSE(r.state.setpoint);
  }
}

TEST(Gateway, DisarmDropsToManual) {
  GatewayState g = autonomous(0.0);
  ASSERT_EQ(g.mode, GatewayMode::kAutonomous);
  const auto r = arbitrate(g, command(kOperatorSource, 5, Disarm{}), 3, Pose{});
  EXPECT_EQ(r.state.mode, GatewayMode::kManual);
  EXPECT_FALSE(r.state.armed);
  EXPECT_FALSE(r.state.setpoint);
}

TEST(Gateway, WatchdogFallsBackToLevelHold) {
  GatewayState g = autonomous(0.0);
  g = arbitrate(g, heartbeat(kBackseatSource, 1), 1.0, Pose{}).state;
  const Pose dr{Vec3(4, -2, 6), quat_from_euler(0.2, -0.1, 1.3)};
  auto r = check_watchdog(g, 3.0, dr);  // gap exactly 2 s: not yet
  EXPECT_EQ(r.state.mode, GatewayMode::kAutonomous);
  r = check_watchdog(g, 3.05, dr);
  EXPECT_EQ(r.state.mode, GatewayMode::kPosition);
  EXPECT_TRUE(has_event(r.effects, "watchdog"));
  ASSERT_TRUE(r.state.setpoint);
  const Pose& hold = std::get<Pose>(r.state.setpoint->target);
  EXPECT_EQ(hold.position, dr.position);
  const EulerAngles e = euler_from_quat(hold.orientation);
  EXPECT_NEAR(e.roll, 0.0, 1e-12);
  EXPECT_NEAR(e.pitch, 0.0, 1e-12);
  EXPECT_NEAR(e.yaw, 1.3, 1e-12);
}

TEST(Gateway, WatchdogOnlyInAutonomous) {
  GatewayState g;
  g = arbitrate(g, command(kOperatorSource, 1, ModeRequest{GatewayMode::kVelocity}), 0, Pose{}).state;
  const auto r = check_watchdog(g, 100.0, Pose{});
  EXPECT_EQ(r.state.mode, GatewayMode::kVelocity);
  EXPECT_TRUE(r.effects.events.empty());
}

// Random heartbeat loss over a 60 s window checked every 50 ms. The oracle is
// the gap since the later of mode entry and the last heartbeat.
TEST(Gateway, WatchdogTripsWithinOneTickInLossScenarios) {
  std::mt19937_64 rng(5);
  for (int scenario = 0; scenario < 200; ++scenario) {
    std::bernoulli_distribution drop(std::uniform_real_distribution<double>(0.0, 1.0)(rng));
    const double outage_start = std::uniform_real_distribution<double>(0.0, 50.0)(rng);
    GatewayState g = autonomous(0.0);
    double last = 0.0;
    std::uint64_t seq = 0;
    bool tripped = false;
    for (int k = 1; k <= 1200; ++k) {
      const double t = 0.05 * k;
      if (k % 10 == 0 && t < outage_start && !drop(rng)) {
        g = arbitrate(g, heartbeat(kBackseatSource, ++seq), t, Pose{}).state;
        last = t;
      }
      const Pose dr{Vec3(t, 0, 5), Quat::Identity()};
      const auto r = check_watchdog(g, t, dr);
      const bool expect_trip = !tripped && t - last > 2.0;
      ASSERT_EQ(r.state.mode == GatewayMode::kPosition, expect_trip || tripped)
          << "scenario " << scenario << " t " << t;
      if (expect_trip) {
        ASSERT_TRUE(has_event(r.effects, "watchdog"));
        ASSERT_EQ(std::get<Pose>(r.state.setpoint->target).position, dr.position);
        tripped = true;
      }
      g = r.state;
    }
    EXPECT_TRUE(tripped);  // every scenario ends in a long outage
  }
}

TEST(Gateway, TransformUpdateIsIdempotent) {
  GatewayState g = autonomous(0.0);
  const Transform tf{quat_from_euler(0, 0, 0.3), Vec3(1.0, -2.0, 0.0)};
  const Message m{{kBackseatSource, 9, 1.0}, TransformUpdate{tf}};
  const GatewayState once = arbitrate(g, m, 1.0, Pose{}).state;
  const GatewayState twice = arbitrate(once, m, 1.1, Pose{}).state;
  const Pose target{Vec3(10, 10, 5), quat_from_euler(0, 0, 1.0)};
  const Pose a = to_dr_frame(once, target), b = to_dr_frame(twice, target);
  EXPECT_EQ(a.position, b.position);
  EXPECT_EQ(a.orientation.coeffs(), b.orientation.coeffs());
  // Mapping back into the backseat frame recovers the target.
  const Pose back = apply(once.transform, a);
  EXPECT_LT((back.position - target.position).norm(), 1e-12);
}

TEST(Gateway, PositionCommandConvertedToDrFrame) {
  GatewayState g = autonomous(0.0);
  g.transform = Transform{Quat::Identity(), Vec3(-0.5, 0.25, 0.0)};
  const auto r = arbitrate(g, command(kBackseatSource, 3, Pose{Vec3(10, 0, 5), Quat::Identity()}), 1, Pose{});
  ASSERT_TRUE(r.effects.forwarded);
  EXPECT_LT((std::get<Pose>(r.effects.forwarded->target).position - Vec3(10.5, -0.25, 5)).norm(), 1e-12);
}
