#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <gtest/gtest.h>

#include "auv/protocol.hpp"
#include "../support/message_fuzz.hpp"

using namespace auv;

namespace {

const std::filesystem::path kVectors = AUV_SOURCE_DIR "/tests/conformance/vectors";

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> golden() {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::directory_iterator(kVectors)) {
    if (e.path().extension() == ".msg") out[e.path().stem().string()] = slurp(e.path());
  }
  return out;
}

Quat yaw90() { return Quat(std::sqrt(0.5), 0.0, 0.0, std::sqrt(0.5)); }

}  // namespace

TEST(ProtocolVectors, DecodeEncodeIsByteIdentity) {
  const auto vectors = golden();
  ASSERT_GE(vectors.size(), 19u);
  for (const auto& [name, bytes] : vectors) {
    const DecodeResult r = decode(bytes);
    ASSERT_TRUE(r.ok()) << name << ": " << (r.error ? r.error->message : "");
    EXPECT_TRUE(r.warnings.empty()) << name;
    EXPECT_EQ(encode(*r.message), bytes) << name;
  }
}

TEST(ProtocolVectors, HandBuiltMessagesMatchGoldenBytes) {
  const auto v = golden();
  EXPECT_EQ(encode(Message{{"backseat", 7, 1.5}, Heartbeat{}}), v.at("heartbeat_001"));
  EXPECT_EQ(encode(Message{{"frontseat", 1, 0.0}, Heartbeat{}}), v.at("heartbeat_002"));

  Telemetry t;
  t.pose = Pose{Vec3(1.25, -3.5, 5.0), Quat::Identity()};
  t.twist = Twist{Vec3(0.3, 0.0, -0.01), Vec3(0.0, 0.0, 0.1)};
  t.depth = 5.0;
  t.battery_voltage = 16.25;
  EXPECT_EQ(encode(Message{{"frontseat", 42, 4.2}, t}), v.at("telemetry_001"));

  Telemetry e;
  e.pose = Pose{Vec3(1e-7, 123456.789, 1e21), yaw90()};
  e.twist = Twist{Vec3(-0.0, 2.5e-05, 100000.0), Vec3(1.0 / 3.0, -2.0 / 3.0, 0.1 + 0.2)};
  e.depth = 1e21;
  e.battery_voltage = 13.2;
  e.leak = true;
  EXPECT_EQ(encode(Message{{"frontseat", 3, 0.1 + 0.2}, e}), v.at("telemetry_002"));

  EXPECT_EQ(encode(Message{{"frontseat", 10, 0.2},
                           SensorData{ImuReading{Quat::Identity(), Vec3(0.001, -0.002, 0.05),
                                                 Vec3(0.0, 0.0, -9.81), 0.2}}}),
            v.at("sensor_imu_001"));
  EXPECT_EQ(encode(Message{{"frontseat", 11, 0.2}, SensorData{DepthReading{4.98, 0.2}}}),
            v.at("sensor_depth_001"));
  EXPECT_EQ(encode(Message{{"frontseat", 12, 0.2},
                           SensorData{DvlReading{Vec3(0.31, 0.02, -0.005), 7.0, true, 0.2}}}),
            v.at("sensor_dvl_001"));

  ExternalOdomReading odom;
  odom.pose = Pose{Vec3(10.0, 0.5, 5.0), Quat::Identity()};
  odom.covariance = Mat6::Zero();
  odom.covariance.diagonal() << 0.0025, 0.0025, 0.0025, 1e-4, 1e-4, 1e-4;
  EXPECT_EQ(encode(Message{{"backseat", 5, 2.5}, SensorData{odom}}), v.at("sensor_odom_001"));

  EXPECT_EQ(encode(Message{{"operator", 2, 0.0}, Command{2, ModeRequest{GatewayMode::kAutonomous}}}),
            v.at("command_mode_001"));
  EXPECT_EQ(encode(Message{{"operator", 1, 0.0}, Command{1, Arm{}}}), v.at("command_arm_001"));
  EXPECT_EQ(encode(Message{{"operator", 9, 300.0}, Command{9, Disarm{}}}), v.at("command_disarm_001"));
  EXPECT_EQ(encode(Message{{"backseat", 20, 2.0},
                           Command{5, Twist{Vec3(0.3, 0.0, 0.0), Vec3(0.0, 0.0, -0.1)}}}),
            v.at("command_velocity_001"));
  EXPECT_EQ(encode(Message{{"backseat", 21, 2.1}, Command{6, Pose{Vec3(10.0, 10.0, 5.0), yaw90()}}}),
            v.at("command_position_001"));
  EXPECT_EQ(encode(Message{{"backseat", 22, 2.2},
                           Command{7, Wrench{Vec3(12.5, -3.0, 0.75), Vec3(0.0, 0.1, -0.25)}}}),
            v.at("command_wrench_001"));
  EXPECT_EQ(encode(Message{{"backseat", 30, 3.0},
                           TransformUpdate{Transform{Quat::Identity(), Vec3(-0.12, 0.05, 0.0)}}}),
            v.at("transform_001"));
  EXPECT_EQ(encode(Message{{"frontseat", 31, 3.1}, Ack{7, true, ""}}), v.at("ack_001"));
  EXPECT_EQ(encode(Message{{"frontseat", 32, 3.2}, Ack{8, false, "mode"}}), v.at("ack_002"));
  EXPECT_EQ(encode(Message{{"frontseat", 33, 3.3}, Ack{9, false, "quote \" slash \\ tab \t bell \x07"}}),
            v.at("ack_003"));
}

TEST(ProtocolVectors, InvalidLinesNameTheField) {
  std::ifstream in(kVectors / "invalid.tsv");
  std::string row;
  int rows = 0;
  while (std::getline(in, row)) {
    const auto a = row.find('\t');
    const auto b = row.find('\t', a + 1);
    const std::string name = row.substr(0, a), field = row.substr(a + 1, b - a - 1);
    const DecodeResult r = decode(row.substr(b + 1));
    ASSERT_FALSE(r.ok()) << name;
    ASSERT_TRUE(r.error.has_value()) << name;
    EXPECT_EQ(r.error->field, field) << name << ": " << r.error->message;
    ++rows;
  }
  EXPECT_EQ(rows, 12);
}

TEST(Protocol, NumberFormatting) {
  EXPECT_EQ(format_double(0.0), "0");
  EXPECT_EQ(format_double(-0.0), "-0.0");
  EXPECT_EQ(format_double(1.5), "1.5");
  EXPECT_EQ(format_double(0.1 + 0.2), "0.30000000000000004");
  EXPECT_EQ(format_double(1e21), "1e+21");
  EXPECT_EQ(format_double(1e-7), "1e-07");
  EXPECT_EQ(format_double(300.0), "300");
}

TEST(Protocol, NonFiniteRefused) {
  Telemetry t;
  t.depth = NAN;
  EXPECT_THROW(encode(Message{{"frontseat", 1, 0.0}, t}), ProtocolError);
  EXPECT_THROW(encode(Message{{"frontseat", 1, INFINITY}, Heartbeat{}}), ProtocolError);
}

TEST(Protocol, FuzzedRoundTripIsIdentity) {
  fuzz::MessageFuzzer fuzz(2024);
  for (int i = 0; i < 20000; ++i) {
    const Message m = fuzz.message();
    const std::string line = encode(m);
    ASSERT_EQ(line.back(), '\n');
    ASSERT_EQ(line.find('\n'), line.size() - 1);
    const DecodeResult r = decode(line);
    ASSERT_TRUE(r.ok()) << line;
    ASSERT_TRUE(identical(m, *r.message)) << line;
    ASSERT_EQ(encode(*r.message), line);
  }
}

TEST(Protocol, UnknownKeyIsWarningNotError) {
  const DecodeResult r = decode(R"({"type":"HEARTBEAT","src":"backseat","seq":7,"t":1.5,"colour":"red"})");
  ASSERT_TRUE(r.ok());
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_NE(r.warnings[0].find("colour"), std::string::npos);
}

TEST(Protocol, FramerResyncsAfterTruncatedLine) {
  MessageReader reader;
  const std::string good = encode(Message{{"backseat", 8, 2.0}, Heartbeat{}});
  reader.feed(R"({"type":"HEARTBEAT","src":"backseat","seq":7,"t":1.)");
  reader.feed("\n" + good.substr(0, 10));
  auto first = reader.next();
  ASSERT_TRUE(first);
  EXPECT_FALSE(first->message);
  ASSERT_TRUE(first->error);
  EXPECT_EQ(first->error->field, "<line>");
  EXPECT_FALSE(reader.next());  // second line still incomplete
  reader.feed(good.substr(10));
  auto second = reader.next();
  ASSERT_TRUE(second && second->message);
  EXPECT_EQ(second->message->header.seq, 8u);
}

TEST(Protocol, OversizeLineDropped) {
  LineFramer f(64);
  f.feed(std::string(200, 'x') + "\nshort\n");
  EXPECT_EQ(f.dropped(), 1u);
  const auto line = f.next_line();
  ASSERT_TRUE(line);
  EXPECT_EQ(*line, "short");
  EXPECT_FALSE(f.next_line());
}

TEST(Protocol, DuplicateSequenceIsStale) {
  MessageReader reader;
  const std::string a = encode(Message{{"backseat", 5, 1.0}, Heartbeat{}});
  const std::string other = encode(Message{{"operator", 5, 1.0}, Heartbeat{}});
  const std::string later = encode(Message{{"backseat", 6, 1.2}, Heartbeat{}});
  reader.feed(a + a + other + later + a);
  std::vector<bool> stale;
  while (auto r = reader.next()) stale.push_back(r->stale);
  EXPECT_EQ(stale, (std::vector<bool>{false, true, false, false, true}));
}

TEST(Protocol, WriterStampsIncreasingSequence) {
  MessageWriter w("frontseat");
  for (std::uint64_t i = 1; i <= 5; ++i) {
    const DecodeResult r = decode(w.write(0.1 * i, Heartbeat{}));
    ASSERT_TRUE(r.ok());
    EXPECT_EQ(r.message->header.seq, i);
    EXPECT_EQ(r.message->header.source, "frontseat");
  }
  EXPECT_EQ(w.last_seq(), 5u);
}
