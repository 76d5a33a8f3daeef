#pragma once

// Frontseat/backseat line protocol.
//
// Every message is one newline-terminated line holding a flat JSON object.
// Keys appear in a fixed order: type, src, seq, t, then the payload keys of
// the message type (see README "Wire format"). Numbers use the shortest
// decimal form that round-trips (std::to_chars), booleans are true/false,
// strings are JSON strings with minimal escaping. No nesting.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "auv/frames.hpp"
#include "auv/sensors.hpp"

namespace auv {

enum class GatewayMode { kManual, kVelocity, kPosition, kAutonomous };

const char* to_string(GatewayMode m);
std::optional<GatewayMode> gateway_mode_from_string(std::string_view s);

struct Header {
  std::string source;
  std::uint64_t seq = 0;
  double timestamp = 0.0;

  bool operator==(const Header&) const = default;
};

struct Telemetry {
  Pose pose;
  Twist twist;
  double depth = 0.0;
  double battery_voltage = 0.0;
  bool leak = false;
};

/// The reading timestamp travels as the header timestamp.
struct SensorData {
  std::variant<ImuReading, DepthReading, DvlReading, ExternalOdomReading> reading;
};

struct ModeRequest {
  GatewayMode mode = GatewayMode::kManual;
};
struct Arm {};
struct Disarm {};

struct Command {
  std::uint64_t id = 0;
  std::variant<ModeRequest, Twist, Pose, Wrench, Arm, Disarm> body;
};

struct TransformUpdate {
  Transform transform;
};

struct Ack {
  std::uint64_t command_id = 0;
  bool accepted = false;
  std::string reason;
};

struct Heartbeat {};

using MessageBody = std::variant<Telemetry, SensorData, Command, TransformUpdate, Ack, Heartbeat>;

struct Message {
  Header header;
  MessageBody body;
};

const char* type_name(const Message& m);

/// Exact field-by-field equality (bitwise for doubles, so round-trip checks
/// really are identity checks).
bool identical(const Message& a, const Message& b);

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Throws ProtocolError for a non-finite number or a malformed header.
std::string encode(const Message& m);

struct DecodeError {
  std::string field;  // offending key, or "<line>" for syntax errors
  std::string message;
};

struct DecodeResult {
  std::optional<Message> message;
  std::optional<DecodeError> error;
  std::vector<std::string> warnings;  // unknown keys and similar

  bool ok() const { return message.has_value(); }
};

/// Decodes one line; a trailing newline is accepted. Never throws.
DecodeResult decode(std::string_view line);

/// Shortest round-trip decimal, the format used on the wire.
std::string format_double(double v);

/// Splits a byte stream into lines. A line longer than max_line is dropped
/// and reported; framing resumes after the next newline.
class LineFramer {
 public:
  explicit LineFramer(std::size_t max_line = 1 << 16) : max_line_(max_line) {}

  void feed(std::string_view bytes);
  std::optional<std::string> next_line();
  std::size_t dropped() const { return dropped_; }

 private:
  std::string buffer_;
  std::vector<std::string> ready_;
  std::size_t read_pos_ = 0;
  std::size_t max_line_;
  std::size_t dropped_ = 0;
  bool discarding_ = false;
};

/// Tracks per-source sequence numbers; a number not above the last one seen
/// is reported stale.
class SequenceTracker {
 public:
  bool observe(const Header& h);

 private:
  std::map<std::string, std::uint64_t> last_;
};

struct Received {
  std::optional<Message> message;
  bool stale = false;
  std::optional<DecodeError> error;
  std::vector<std::string> warnings;
};

/// Framer + decoder + sequence tracking for one inbound stream.
class MessageReader {
 public:
  void feed(std::string_view bytes) { framer_.feed(bytes); }
  std::optional<Received> next();

 private:
  LineFramer framer_;
  SequenceTracker seq_;
};

/// Stamps outgoing messages with a per-source increasing sequence number.
class MessageWriter {
 public:
  explicit MessageWriter(std::string source) : source_(std::move(source)) {}

  std::string write(double t, MessageBody body);
  std::uint64_t last_seq() const { return seq_; }
  const std::string& source() const { return source_; }

 private:
  std::string source_;
  std::uint64_t seq_ = 0;
};

}  // namespace auv
