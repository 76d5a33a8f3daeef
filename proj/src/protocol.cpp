#include "auv/protocol.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <set>

#include <json.hpp>

namespace auv {

using nlohmann::json;

const char* to_string(GatewayMode m) {
  switch (m) {
    case GatewayMode::kManual: return "MANUAL";
    case GatewayMode::kVelocity: return "VELOCITY";
    case GatewayMode::kPosition: return "POSITION";
    case GatewayMode::kAutonomous: return "AUTONOMOUS";
  }
  return "UNKNOWN";
}

std::optional<GatewayMode> gateway_mode_from_string(std::string_view s) {
  for (auto m : {GatewayMode::kManual, GatewayMode::kVelocity, GatewayMode::kPosition,
                 GatewayMode::kAutonomous}) {
    if (s == to_string(m)) return m;
  }
  return std::nullopt;
}

const char* type_name(const Message& m) {
  static constexpr const char* names[] = {"TELEMETRY", "SENSOR", "COMMAND", "TRANSFORM", "ACK", "HEARTBEAT"};
  return names[m.body.index()];
}

std::string format_double(double v) {
  if (v == 0.0) return std::signbit(v) ? "-0.0" : "0";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

namespace {

// ---------------------------------------------------------------------------
// Encoding

class LineWriter {
 public:
  void key(std::string_view k) {
    out_ += first_ ? "{\"" : ",\"";
    first_ = false;
    out_ += k;
    out_ += "\":";
  }
  void num(std::string_view k, double v) {
    if (!std::isfinite(v)) throw ProtocolError("field '" + std::string(k) + "' is not finite");
    key(k);
    out_ += format_double(v);
  }
  void u64(std::string_view k, std::uint64_t v) {
    key(k);
    out_ += std::to_string(v);
  }
  void boolean(std::string_view k, bool v) {
    key(k);
    out_ += v ? "true" : "false";
  }
  void str(std::string_view k, std::string_view v) {
    key(k);
    out_ += '"';
    for (unsigned char c : v) {
      switch (c) {
        case '"': out_ += "\\\""; break;
        case '\\': out_ += "\\\\"; break;
        case '\n': out_ += "\\n"; break;
        case '\r': out_ += "\\r"; break;
        case '\t': out_ += "\\t"; break;
        default:
          if (c < 0x20) {
            static constexpr char hex[] = "0123456789abcdef";
            out_ += "\\u00";
            out_ += hex[c >> 4];
            out_ += hex[c & 0xF];
          } else {
            out_ += static_cast<char>(c);
          }
      }
    }
    out_ += '"';
  }
  void position(const Vec3& p) {
    num("x", p.x());
    num("y", p.y());
    num("z", p.z());
  }
  void quat(const Quat& q) {
    num("qw", q.w());
    num("qx", q.x());
    num("qy", q.y());
    num("qz", q.z());
  }
  void vec(std::string_view prefix, const Vec3& v) {
    static constexpr const char* axes[] = {"x", "y", "z"};
    for (int i = 0; i < 3; ++i) num(std::string(prefix) + axes[i], v(i));
  }
  std::string finish() {
    out_ += "}\n";
    return std::move(out_);
  }

 private:
  std::string out_;
  bool first_ = true;
};

std::string odom_cov_key(int i, int j) { return "c" + std::to_string(i) + std::to_string(j); }

const char* command_name(const Command& c) {
  static constexpr const char* names[] = {"mode", "velocity", "position", "wrench", "arm", "disarm"};
  return names[c.body.index()];
}

const char* sensor_kind(const SensorData& s) {
  static constexpr const char* names[] = {"imu", "depth", "dvl", "odom"};
  return names[s.reading.index()];
}

struct BodyEncoder {
  LineWriter& w;

  void operator()(const Telemetry& m) {
    w.position(m.pose.position);
    w.quat(m.pose.orientation);
    w.vec("v", m.twist.linear);
    w.vec("w", m.twist.angular);
    w.num("depth", m.depth);
    w.num("battery", m.battery_voltage);
    w.boolean("leak", m.leak);
  }
  void operator()(const SensorData& m) {
    w.str("kind", sensor_kind(m));
    std::visit([this](const auto& r) { reading(r); }, m.reading);
  }
  void reading(const ImuReading& r) {
    w.quat(r.orientation);
    w.vec("w", r.angular_rate);
    w.vec("a", r.linear_accel);
  }
  void reading(const DepthReading& r) { w.num("depth", r.depth); }
  void reading(const DvlReading& r) {
    w.vec("v", r.velocity);
    w.num("alt", r.altitude);
    w.boolean("lock", r.bottom_lock);
  }
  void reading(const ExternalOdomReading& r) {
    w.position(r.pose.position);
    w.quat(r.pose.orientation);
    for (int i = 0; i < 6; ++i) {
      for (int j = i; j < 6; ++j) w.num(odom_cov_key(i, j), r.covariance(i, j));
    }
  }
  void operator()(const Command& m) {
    w.u64("id", m.id);
    w.str("cmd", command_name(m));
    std::visit([this](const auto& b) { command(b); }, m.body);
  }
  void command(const ModeRequest& b) { w.str("mode", to_string(b.mode)); }
  void command(const Twist& b) {
    w.vec("v", b.linear);
    w.vec("w", b.angular);
  }
  void command(const Pose& b) {
    w.position(b.position);
    w.quat(b.orientation);
  }
  void command(const Wrench& b) {
    w.vec("f", b.force);
    w.vec("m", b.torque);
  }
  void command(const Arm&) {}
  void command(const Disarm&) {}
  void operator()(const TransformUpdate& m) {
    w.position(m.transform.translation);
    w.quat(m.transform.rotation);
  }
  void operator()(const Ack& m) {
    w.u64("id", m.command_id);
    w.boolean("accepted", m.accepted);
    w.str("reason", m.reason);
  }
  void operator()(const Heartbeat&) {}
};

// ---------------------------------------------------------------------------
// Decoding

struct FieldError {
  std::string field;
  std::string message;
};

class FieldReader {
 public:
  explicit FieldReader(const json& obj) : obj_(obj) {}

  const json& get(const std::string& k) {
    const auto it = obj_.find(k);
    if (it == obj_.end()) throw FieldError{k, "missing required field"};
    used_.insert(k);
    return *it;
  }
  double num(const std::string& k) {
    const json& v = get(k);
    if (!v.is_number()) throw FieldError{k, "expected a number"};
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw FieldError{k, "number is not finite"};
    return d;
  }
  std::uint64_t u64(const std::string& k) {
    const json& v = get(k);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      throw FieldError{k, "expected a non-negative integer"};
    }
    return v.get<std::uint64_t>();
  }
  bool boolean(const std::string& k) {
    const json& v = get(k);
    if (!v.is_boolean()) throw FieldError{k, "expected true or false"};
    return v.get<bool>();
  }
  std::string str(const std::string& k) {
    const json& v = get(k);
    if (!v.is_string()) throw FieldError{k, "expected a string"};
    return v.get<std::string>();
  }
  Vec3 position() { return {num("x"), num("y"), num("z")}; }
  Quat quat() {
    const double w = num("qw");
    const double x = num("qx");
    const double y = num("qy");
    const double z = num("qz");
    return Quat(w, x, y, z);
  }
  Vec3 vec(const std::string& prefix) {
    const double x = num(prefix + "x");
    const double y = num(prefix + "y");
    const double z = num(prefix + "z");
    return {x, y, z};
  }
  std::vector<std::string> unknown_keys() const {
    std::vector<std::string> out;
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!used_.count(it.key())) out.push_back(it.key());
    }
    return out;
  }

 private:
  const json& obj_;
  std::set<std::string> used_;
};

MessageBody decode_body(const std::string& type, FieldReader& f, double t) {
  if (type == "TELEMETRY") {
    Telemetry m;
    m.pose.position = f.position();
    m.pose.orientation = f.quat();
    m.twist.linear = f.vec("v");
    m.twist.angular = f.vec("w");
    m.depth = f.num("depth");
    m.battery_voltage = f.num("battery");
    m.leak = f.boolean("leak");
    return m;
  }
  if (type == "SENSOR") {
    const std::string kind = f.str("kind");
    if (kind == "imu") {
      ImuReading r;
      r.orientation = f.quat();
      r.angular_rate = f.vec("w");
      r.linear_accel = f.vec("a");
      r.timestamp = t;
      return SensorData{r};
    }
    if (kind == "depth") return SensorData{DepthReading{f.num("depth"), t}};
    if (kind == "dvl") {
      DvlReading r;
      r.velocity = f.vec("v");
      r.altitude = f.num("alt");
      r.bottom_lock = f.boolean("lock");
      r.timestamp = t;
      return SensorData{r};
    }
    if (kind == "odom") {
      ExternalOdomReading r;
      r.pose.position = f.position();
      r.pose.orientation = f.quat();
      for (int i = 0; i < 6; ++i) {
        for (int j = i; j < 6; ++j) {
          r.covariance(i, j) = r.covariance(j, i) = f.num(odom_cov_key(i, j));
        }
      }
      r.timestamp = t;
      return SensorData{r};
    }
    throw FieldError{"kind", "unknown sensor kind '" + kind + "'"};
  }
  if (type == "COMMAND") {
    Command c;
    c.id = f.u64("id");
    const std::string cmd = f.str("cmd");
    if (cmd == "mode") {
      const std::string mode = f.str("mode");
      const auto m = gateway_mode_from_string(mode);
      if (!m) throw FieldError{"mode", "unknown mode '" + mode + "'"};
      c.body = ModeRequest{*m};
    } else if (cmd == "velocity") {
      Twist tw;
      tw.linear = f.vec("v");
      tw.angular = f.vec("w");
      c.body = tw;
    } else if (cmd == "position") {
      Pose p;
      p.position = f.position();
      p.orientation = f.quat();
      c.body = p;
    } else if (cmd == "wrench") {
      Wrench w;
      w.force = f.vec("f");
      w.torque = f.vec("m");
      c.body = w;
    } else if (cmd == "arm") {
      c.body = Arm{};
    } else if (cmd == "disarm") {
      c.body = Disarm{};
    } else {
      throw FieldError{"cmd", "unknown command '" + cmd + "'"};
    }
    return c;
  }
  if (type == "TRANSFORM") {
    TransformUpdate m;
    m.transform.translation = f.position();
    m.transform.rotation = f.quat();
    return m;
  }
  if (type == "ACK") {
    Ack a;
    a.command_id = f.u64("id");
    a.accepted = f.boolean("accepted");
    a.reason = f.str("reason");
    return a;
  }
  if (type == "HEARTBEAT") return Heartbeat{};
  throw FieldError{"type", "unknown message type '" + type + "'"};
}

// ---------------------------------------------------------------------------
// Identity comparison

bool same(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }
bool same(const Vec3& a, const Vec3& b) {
  return same(a.x(), b.x()) && same(a.y(), b.y()) && same(a.z(), b.z());
}
bool same(const Quat& a, const Quat& b) {
  return same(a.w(), b.w()) && same(a.x(), b.x()) && same(a.y(), b.y()) && same(a.z(), b.z());
}
bool same(const Pose& a, const Pose& b) {
  return same(a.position, b.position) && same(a.orientation, b.orientation);
}
bool same(const Twist& a, const Twist& b) { return same(a.linear, b.linear) && same(a.angular, b.angular); }
bool same(const Wrench& a, const Wrench& b) { return same(a.force, b.force) && same(a.torque, b.torque); }

struct SameReading {
  bool operator()(const ImuReading& a, const ImuReading& b) const {
    return same(a.orientation, b.orientation) && same(a.angular_rate, b.angular_rate) &&
           same(a.linear_accel, b.linear_accel);
  }
  bool operator()(const DepthReading& a, const DepthReading& b) const { return same(a.depth, b.depth); }
  bool operator()(const DvlReading& a, const DvlReading& b) const {
    return same(a.velocity, b.velocity) && same(a.altitude, b.altitude) && a.bottom_lock == b.bottom_lock;
  }
  bool operator()(const ExternalOdomReading& a, const ExternalOdomReading& b) const {
    if (!same(a.pose, b.pose)) return false;
    for (int i = 0; i < 6; ++i) {
      for (int j = i; j < 6; ++j) {
        if (!same(a.covariance(i, j), b.covariance(i, j))) return false;
      }
    }
    return true;
  }
  template <class A, class B>
  bool operator()(const A&, const B&) const { return false; }
};

struct SameCommand {
  bool operator()(const ModeRequest& a, const ModeRequest& b) const { return a.mode == b.mode; }
  bool operator()(const Twist& a, const Twist& b) const { return same(a, b); }
  bool operator()(const Pose& a, const Pose& b) const { return same(a, b); }
  bool operator()(const Wrench& a, const Wrench& b) const { return same(a, b); }
  bool operator()(const Arm&, const Arm&) const { return true; }
  bool operator()(const Disarm&, const Disarm&) const { return true; }
  template <class A, class B>
  bool operator()(const A&, const B&) const { return false; }
};

struct SameBody {
  bool operator()(const Telemetry& a, const Telemetry& b) const {
    return same(a.pose, b.pose) && same(a.twist, b.twist) && same(a.depth, b.depth) &&
           same(a.battery_voltage, b.battery_voltage) && a.leak == b.leak;
  }
  bool operator()(const SensorData& a, const SensorData& b) const {
    return std::visit(SameReading{}, a.reading, b.reading);
  }
  bool operator()(const Command& a, const Command& b) const {
    return a.id == b.id && std::visit(SameCommand{}, a.body, b.body);
  }
  bool operator()(const TransformUpdate& a, const TransformUpdate& b) const {
    return same(a.transform.translation, b.transform.translation) &&
           same(a.transform.rotation, b.transform.rotation);
  }
  bool operator()(const Ack& a, const Ack& b) const {
    return a.command_id == b.command_id && a.accepted == b.accepted && a.reason == b.reason;
  }
  bool operator()(const Heartbeat&, const Heartbeat&) const { return true; }
  template <class A, class B>
  bool operator()(const A&, const B&) const { return false; }
};

}  // namespace

bool identical(const Message& a, const Message& b) {
  return a.header.source == b.header.source && a.header.seq == b.header.seq &&
         same(a.header.timestamp, b.header.timestamp) && std::visit(SameBody{}, a.body, b.body);
}

std::string encode(const Message& m) {
  LineWriter w;
  w.str("type", type_name(m));
  w.str("src", m.header.source);
  w.u64("seq", m.header.seq);
  w.num("t", m.header.timestamp);
  std::visit(BodyEncoder{w}, m.body);
  return w.finish();
}

DecodeResult decode(std::string_view line) {
  DecodeResult res;
  if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  if (line.find('\n') != std::string_view::npos) {
    res.error = DecodeError{"<line>", "embedded newline"};
    return res;
  }
  json doc = json::parse(line.begin(), line.end(), nullptr, false);
  if (doc.is_discarded()) {
    res.error = DecodeError{"<line>", "malformed or truncated record"};
    return res;
  }
  if (!doc.is_object()) {
    res.error = DecodeError{"<line>", "record is not an object"};
    return res;
  }
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (it->is_structured()) {
      res.error = DecodeError{it.key(), "nested values are not allowed"};
      return res;
    }
  }
  try {
    FieldReader f(doc);
    Message m;
    const std::string type = f.str("type");
    m.header.source = f.str("src");
    m.header.seq = f.u64("seq");
    m.header.timestamp = f.num("t");
    m.body = decode_body(type, f, m.header.timestamp);
    for (const auto& k : f.unknown_keys()) res.warnings.push_back("unknown key '" + k + "' ignored");
    res.message = std::move(m);
  } catch (const FieldError& e) {
    res.error = DecodeError{e.field, e.message};
  } catch (const json::exception& e) {
    res.error = DecodeError{"<line>", e.what()};
  }
  return res;
}

void LineFramer::feed(std::string_view bytes) {
  for (char c : bytes) {
    if (c == '\n') {
      if (discarding_) {
        discarding_ = false;
      } else {
        ready_.push_back(std::move(buffer_));
      }
      buffer_.clear();
      continue;
    }
    if (discarding_) continue;
    buffer_ += c;
    if (buffer_.size() > max_line_) {
      buffer_.clear();
      discarding_ = true;
      ++dropped_;
    }
  }
}

std::optional<std::string> LineFramer::next_line() {
  if (read_pos_ >= ready_.size()) {
    ready_.clear();
    read_pos_ = 0;
    return std::nullopt;
  }
  return std::move(ready_[read_pos_++]);
}

bool SequenceTracker::observe(const Header& h) {
  const auto it = last_.find(h.source);
  if (it == last_.end()) {
    last_.emplace(h.source, h.seq);
    return false;
  }
  if (h.seq <= it->second) return true;
  it->second = h.seq;
  return false;
}

std::optional<Received> MessageReader::next() {
  auto line = framer_.next_line();
  if (!line) return std::nullopt;
  DecodeResult d = decode(*line);
  Received r;
  r.error = std::move(d.error);
  r.warnings = std::move(d.warnings);
  if (d.message) {
    r.stale = seq_.observe(d.message->header);
    r.message = std::move(d.message);
  }
  return r;
}

std::string MessageWriter::write(double t, MessageBody body) {
  Message m{{source_, ++seq_, t}, std::move(body)};
  return encode(m);
}

}  // namespace auv
