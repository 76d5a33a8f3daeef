#pragma once

// Random protocol messages for round-trip fuzzing. Doubles are drawn from
// several regimes (ordinary, tiny, huge, exact integers, negative zero, raw
// random bit patterns) so the shortest-decimal path is exercised widely.

#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include "auv/protocol.hpp"

namespace auv::fuzz {

class MessageFuzzer {
 public:
  explicit MessageFuzzer(std::uint64_t seed) : rng_(seed) {}

  double number() {
    switch (pick(7)) {
      case 0: return normal_(rng_);
      case 1: return normal_(rng_) * 1e-12;
      case 2: return normal_(rng_) * 1e15;
      case 3: return static_cast<double>(static_cast<std::int64_t>(normal_(rng_) * 1e6));
      case 4: return -0.0;
      case 5: {
        double d;
        do {
          d = std::bit_cast<double>(static_cast<std::uint64_t>(rng_()));
        } while (!std::isfinite(d));
        return d;
      }
      default: return std::round(normal_(rng_) * 100.0) / 100.0;
    }
  }

  Vec3 vec() { return {number(), number(), number()}; }
  Quat quat() { return Quat(number(), number(), number(), number()); }  // not normalized on purpose
  Pose pose() { return {vec(), quat()}; }

  std::string text() {
    static constexpr char alphabet[] = "abcXYZ019 _-\"\\\t\n\x01/{}[]:,";
    const std::size_t n = pick(12);
    std::string s;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t k = pick(sizeof(alphabet));
      s += k + 1 == sizeof(alphabet) ? std::string("\xc3\xa9") : std::string(1, alphabet[k]);
    }
    return s;
  }

  MessageBody body() {
    switch (pick(6)) {
      case 0: {
        Telemetry t;
        t.pose = pose();
        t.twist = {vec(), vec()};
        t.depth = number();
        t.battery_voltage = number();
        t.leak = pick(2);
        return t;
      }
      case 1: {
        switch (pick(4)) {
          case 0: return SensorData{ImuReading{quat(), vec(), vec(), 0.0}};
          case 1: return SensorData{DepthReading{number(), 0.0}};
          case 2: return SensorData{DvlReading{vec(), number(), static_cast<bool>(pick(2)), 0.0}};
          default: {
            ExternalOdomReading r;
            r.pose = pose();
            for (int i = 0; i < 6; ++i)
              for (int j = i; j < 6; ++j) r.covariance(i, j) = r.covariance(j, i) = number();
            return SensorData{r};
          }
        }
      }
      case 2: {
        Command c;
        c.id = rng_();
        switch (pick(6)) {
          case 0: c.body = ModeRequest{static_cast<GatewayMode>(pick(4))}; break;
          case 1: c.body = Twist{vec(), vec()}; break;
          case 2: c.body = pose(); break;
          case 3: c.body = Wrench{vec(), vec()}; break;
          case 4: c.body = Arm{}; break;
          default: c.body = Disarm{}; break;
        }
        return c;
      }
      case 3: return TransformUpdate{Transform{quat(), vec()}};
      case 4: return Ack{rng_(), static_cast<bool>(pick(2)), text()};
      default: return Heartbeat{};
    }
  }

  Message message() {
    Message m;
    m.header.source = pick(4) == 0 ? text() : (pick(2) ? "frontseat" : "backseat");
    m.header.seq = pick(3) == 0 ? rng_() : pick(100000);
    m.header.timestamp = number();
    m.body = body();
    // The reading timestamp is carried by the header.
    if (auto* s = std::get_if<SensorData>(&m.body)) {
      std::visit([&](auto& r) { r.timestamp = m.header.timestamp; }, s->reading);
    }
    return m;
  }

 private:
  std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }

  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 10.0};
};

}  // namespace auv::fuzz
