#include "auv/run_log.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace auv {

using ojson = nlohmann::ordered_json;

namespace {

const char* kPoseSuffix[7] = {"x", "y", "z", "qw", "qx", "qy", "qz"};
const char* kTwistSuffix[6] = {"vx", "vy", "vz", "wx", "wy", "wz"};
const char* kWrenchNames[6] = {"fx", "fy", "fz", "mx", "my", "mz"};

std::vector<std::string> build_columns() {
  std::vector<std::string> c = {"tick", "t"};
  const auto pose = [&](const std::string& p) {
    for (const char* s : kPoseSuffix) c.push_back(p + "_" + s);
  };
  pose("truth");
  for (const char* s : kTwistSuffix) c.push_back(std::string("truth_") + s);
  pose("dr");
  c.push_back("dr_cov_h");
  pose("fused");
  c.push_back("fused_cov_h");
  c.push_back("est_valid");
  pose("tf");
  for (const char* s : {"phase", "wp_index", "safety_hold", "sp_x", "sp_y", "sp_z", "sp_yaw"}) c.push_back(s);
  for (const char* s : kWrenchNames) c.push_back(s);
  for (std::size_t i = 0; i < kThrusterCount; ++i) c.push_back("thrust_" + std::to_string(i));
  for (const char* s : {"gw_mode", "armed", "battery", "n_imu", "n_depth", "n_dvl", "n_dvl_lock",
                        "n_odom", "n_gated"})
    c.push_back(s);
  return c;
}

void push_pose(std::vector<std::string>& f, const Vec3& p, const Quat& q) {
  for (int i = 0; i < 3; ++i) f.push_back(format_double(p(i)));
  for (double v : {q.w(), q.x(), q.y(), q.z()}) f.push_back(format_double(v));
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

class RowParser {
 public:
  RowParser(const std::map<std::string, std::size_t>& index, const std::vector<std::string>& fields,
            std::size_t line)
      : index_(index), fields_(fields), line_(line) {}

  const std::string& text(const std::string& col) const { return fields_[index_.at(col)]; }

  double num(const std::string& col) const {
    const std::string& s = text(col);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) bad(col, s);
    return v;
  }

  std::uint64_t count(const std::string& col) const {
    const std::string& s = text(col);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) bad(col, s);
    return v;
  }

  bool flag(const std::string& col) const {
    const std::string& s = text(col);
    if (s != "0" && s != "1") bad(col, s);
    return s == "1";
  }

  Vec3 vec(const std::string& a, const std::string& b, const std::string& c) const {
    return {num(a), num(b), num(c)};
  }

  Pose pose(const std::string& p) const {
    Pose out;
    out.position = vec(p + "_x", p + "_y", p + "_z");
    out.orientation = Quat(num(p + "_qw"), num(p + "_qx"), num(p + "_qy"), num(p + "_qz"));
    return out;
  }

  [[noreturn]] void bad(const std::string& col, const std::string& value) const {
    throw LogFormatError("line " + std::to_string(line_) + ": column '" + col + "' has bad value '" +
                         value + "'");
  }

 private:
  const std::map<std::string, std::size_t>& index_;
  const std::vector<std::string>& fields_;
  std::size_t line_;
};

}  // namespace

const std::vector<std::string>& log_columns() {
  static const std::vector<std::string> cols = build_columns();
  return cols;
}

void write_log_header(std::ostream& os) {
  const auto& c = log_columns();
  for (std::size_t i = 0; i < c.size(); ++i) os << (i ? "\t" : "") << c[i];
  os << '\n';
}

void write_log_row(std::ostream& os, const LogRow& r) {
  std::vector<std::string> f;
  f.reserve(log_columns().size());
  f.push_back(std::to_string(r.tick));
  f.push_back(format_double(r.t));
  push_pose(f, r.truth_pose.position, r.truth_pose.orientation);
  const Vec6 tw = r.truth_twist.stacked();
  for (int i = 0; i < 6; ++i) f.push_back(format_double(tw(i)));
  push_pose(f, r.dr_pose.position, r.dr_pose.orientation);
  f.push_back(format_double(r.dr_cov_h));
  push_pose(f, r.fused_pose.position, r.fused_pose.orientation);
  f.push_back(format_double(r.fused_cov_h));
  f.push_back(r.estimator_valid ? "1" : "0");
  push_pose(f, r.transform.translation, r.transform.rotation);
  f.push_back(to_string(r.phase));
  f.push_back(std::to_string(r.waypoint_index));
  f.push_back(r.safety_hold ? "1" : "0");
  for (int i = 0; i < 3; ++i) f.push_back(format_double(r.setpoint_position(i)));
  f.push_back(format_double(r.setpoint_yaw));
  const Vec6 w = r.wrench.stacked();
  for (int i = 0; i < 6; ++i) f.push_back(format_double(w(i)));
  for (std::size_t i = 0; i < kThrusterCount; ++i) f.push_back(format_double(r.thrusts(static_cast<Eigen::Index>(i))));
  f.push_back(to_string(r.gateway_mode));
  f.push_back(r.armed ? "1" : "0");
  f.push_back(format_double(r.battery_voltage));
  for (std::uint64_t n : {r.counters.imu, r.counters.depth, r.counters.dvl, r.counters.dvl_lock,
                          r.counters.odom, r.counters.gated})
    f.push_back(std::to_string(n));
  for (std::size_t i = 0; i < f.size(); ++i) os << (i ? "\t" : "") << f[i];
  os << '\n';
}

std::vector<LogRow> read_log(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw LogFormatError("empty log: no header");
  const auto header = split(line, '\t');
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < header.size(); ++i) index[header[i]] = i;
  for (const auto& c : log_columns()) {
    if (!index.count(c)) throw LogFormatError("missing column '" + c + "'");
  }

  std::vector<LogRow> rows;
  std::size_t n = 1;
  while (std::getline(is, line)) {
    ++n;
    if (line.empty()) continue;
    const auto fields = split(line, '\t');
    if (fields.size() != header.size()) {
      throw LogFormatError("line " + std::to_string(n) + ": expected " + std::to_string(header.size()) +
                           " fields, got " + std::to_string(fields.size()));
    }
    const RowParser p(index, fields, n);
    LogRow r;
    r.tick = static_cast<std::int64_t>(p.count("tick"));
    r.t = p.num("t");
    r.truth_pose = p.pose("truth");
    r.truth_twist.linear = p.vec("truth_vx", "truth_vy", "truth_vz");
    r.truth_twist.angular = p.vec("truth_wx", "truth_wy", "truth_wz");
    r.dr_pose = p.pose("dr");
    r.dr_cov_h = p.num("dr_cov_h");
    r.fused_pose = p.pose("fused");
    r.fused_cov_h = p.num("fused_cov_h");
    r.estimator_valid = p.flag("est_valid");
    const Pose tf = p.pose("tf");
    r.transform = Transform::from_pose(tf);
    const auto phase = phase_from_string(p.text("phase"));
    if (!phase) p.bad("phase", p.text("phase"));
    r.phase = *phase;
    r.waypoint_index = static_cast<std::size_t>(p.count("wp_index"));
    r.safety_hold = p.flag("safety_hold");
    r.setpoint_position = p.vec("sp_x", "sp_y", "sp_z");
    r.setpoint_yaw = p.num("sp_yaw");
    r.wrench.force = p.vec("fx", "fy", "fz");
    r.wrench.torque = p.vec("mx", "my", "mz");
    for (std::size_t i = 0; i < kThrusterCount; ++i)
      r.thrusts(static_cast<Eigen::Index>(i)) = p.num("thrust_" + std::to_string(i));
    const auto mode = gateway_mode_from_string(p.text("gw_mode"));
    if (!mode) p.bad("gw_mode", p.text("gw_mode"));
    r.gateway_mode = *mode;
    r.armed = p.flag("armed");
    r.battery_voltage = p.num("battery");
    r.counters = {p.count("n_imu"), p.count("n_depth"), p.count("n_dvl"),
                  p.count("n_dvl_lock"), p.count("n_odom"), p.count("n_gated")};
    rows.push_back(r);
  }
  return rows;
}

void write_meta_event(std::ostream& os, const RunMeta& m) {
  ojson wps = ojson::array();
  for (const auto& w : m.waypoints) {
    ojson j;
    j["position"] = {w.position.x(), w.position.y(), w.position.z()};
    j["acceptance_radius"] = w.acceptance_radius;
    j["hold"] = w.hold;
    wps.push_back(j);
  }
  ojson j;
  j["t"] = 0.0;
  j["src"] = "runner";
  j["kind"] = "run";
  j["meta"] = {{"seed", m.seed},
               {"transport", m.transport},
               {"deterministic", m.deterministic},
               {"sim_rate", m.sim_rate},
               {"telemetry_rate", m.telemetry_rate},
               {"duration", m.duration},
               {"vehicle", m.vehicle_path},
               {"mission", m.mission_path},
               {"station_keeping_window", m.station_keeping_window},
               {"waypoints", wps}};
  os << j.dump() << '\n';
}

void write_event(std::ostream& os, const LoggedEvent& e) {
  ojson j;
  j["t"] = e.t;
  j["src"] = e.source;
  j["kind"] = e.kind;
  j["detail"] = e.detail;
  os << j.dump() << '\n';
}

EventLog read_events(std::istream& is) {
  EventLog out;
  std::string line;
  std::size_t n = 0;
  bool have_meta = false;
  while (std::getline(is, line)) {
    ++n;
    if (line.empty()) continue;
    const ojson j = ojson::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw LogFormatError("events line " + std::to_string(n) + ": not a JSON object");
    try {
      if (j.value("kind", "") == "run" && j.contains("meta")) {
        const ojson& m = j["meta"];
        RunMeta& meta = out.meta;
        meta.seed = m.at("seed").get<std::uint64_t>();
        meta.transport = m.at("transport").get<std::string>();
        meta.deterministic = m.at("deterministic").get<bool>();
        meta.sim_rate = m.at("sim_rate").get<double>();
        meta.telemetry_rate = m.at("telemetry_rate").get<double>();
        meta.duration = m.at("duration").get<double>();
        meta.vehicle_path = m.at("vehicle").get<std::string>();
        meta.mission_path = m.at("mission").get<std::string>();
        meta.station_keeping_window = m.at("station_keeping_window").get<double>();
        for (const auto& w : m.at("waypoints")) {
          Waypoint wp;
          const auto& p = w.at("position");
          wp.position = Vec3(p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>());
          wp.acceptance_radius = w.at("acceptance_radius").get<double>();
          wp.hold = w.at("hold").get<double>();
          meta.waypoints.push_back(wp);
        }
        have_meta = true;
        continue;
      }
      out.events.push_back({j.at("t").get<double>(), j.at("src").get<std::string>(),
                            j.at("kind").get<std::string>(), j.value("detail", "")});
    } catch (const ojson::exception& e) {
      throw LogFormatError("events line " + std::to_string(n) + ": " + e.what());
    }
  }
  if (!have_meta) throw LogFormatError("events: missing run metadata record");
  return out;
}

namespace {

ErrorStats error_stats(const std::vector<LogRow>& rows, Pose LogRow::*est) {
  ErrorStats s;
  if (rows.empty()) return s;
  double sum = 0.0, sq = 0.0;
  for (const auto& r : rows) {
    const double e = ((r.*est).position - r.truth_pose.position).norm();
    sum += e;
    sq += e * e;
    s.max = std::max(s.max, e);
  }
  const double n = static_cast<double>(rows.size());
  s.mean = sum / n;
  s.rms = std::sqrt(sq / n);
  const LogRow& last = rows.back();
  const Vec3 d = (last.*est).position - last.truth_pose.position;
  s.final = d.norm();
  s.final_horizontal = d.head<2>().norm();
  return s;
}

ojson stats_json(const ErrorStats& s) {
  return {{"mean", s.mean}, {"rms", s.rms}, {"max", s.max}, {"final", s.final},
          {"final_horizontal", s.final_horizontal}};
}

}  // namespace

MissionReport compute_report(const std::vector<LogRow>& rows, const EventLog& ev) {
  MissionReport r;
  r.seed = ev.meta.seed;
  r.transport = ev.meta.transport;
  r.deterministic = ev.meta.deterministic;
  r.rows = rows.size();
  r.waypoint_count = ev.meta.waypoints.size();
  const auto& wps = ev.meta.waypoints;

  if (rows.empty()) {
    r.final_phase = to_string(PilotPhase::kIdle);
    r.end_reason = "timeout";
    r.exit_code = kExitTimeout;
    return r;
  }
  r.sim_time = rows.back().t;
  const PilotPhase final_phase = rows.back().phase;
  r.final_phase = to_string(final_phase);
  if (final_phase == PilotPhase::kDone) {
    r.end_reason = "done";
    r.exit_code = kExitDone;
  } else if (final_phase == PilotPhase::kFault) {
    r.end_reason = "fault";
    r.exit_code = kExitFault;
  } else {
    r.end_reason = "timeout";
    r.exit_code = kExitTimeout;
  }

  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].phase != PilotPhase::kHold || rows[i - 1].phase == PilotPhase::kHold) continue;
    WaypointArrival a;
    a.index = rows[i].waypoint_index;
    a.time = rows[i].t;
    if (a.index < wps.size()) {
      a.truth_distance = (rows[i].truth_pose.position - wps[a.index].position).norm();
      a.estimate_distance = (rows[i].fused_pose.position - wps[a.index].position).norm();
      a.closest_truth_distance = a.truth_distance;
      for (std::size_t k = i; k < rows.size() && rows[k].phase == PilotPhase::kHold &&
                              rows[k].waypoint_index == a.index;
           ++k) {
        a.closest_truth_distance =
            std::min(a.closest_truth_distance, (rows[k].truth_pose.position - wps[a.index].position).norm());
      }
      a.within_radius = a.closest_truth_distance <= wps[a.index].acceptance_radius;
    }
    r.arrivals.push_back(a);
  }

  r.dr_error = error_stats(rows, &LogRow::dr_pose);
  r.fused_error = error_stats(rows, &LogRow::fused_pose);

  if (!wps.empty()) {
    const std::size_t last = wps.size() - 1;
    double end = -1.0;
    for (const auto& row : rows)
      if (row.phase == PilotPhase::kHold && row.waypoint_index == last) end = row.t;
    if (end >= 0.0) {
      const double start = end - ev.meta.station_keeping_window;
      double sq = 0.0, first = end;
      std::size_t n = 0;
      for (const auto& row : rows) {
        if (row.phase != PilotPhase::kHold || row.waypoint_index != last || row.t < start) continue;
        sq += (row.truth_pose.position - wps[last].position).squaredNorm();
        first = std::min(first, row.t);
        ++n;
      }
      r.station_keeping = StationKeeping{last, end - first, std::sqrt(sq / static_cast<double>(n))};
    }
  }

  for (const auto& e : ev.events) {
    if (e.kind.rfind("gateway.", 0) == 0) ++r.gateway_events;
    if (e.kind == "gateway.watchdog") ++r.watchdog_events;
  }
  return r;
}

std::string report_json(const MissionReport& r) {
  ojson j;
  j["final_phase"] = r.final_phase;
  j["end_reason"] = r.end_reason;
  j["exit_code"] = r.exit_code;
  j["seed"] = r.seed;
  j["transport"] = r.transport;
  j["deterministic"] = r.deterministic;
  j["sim_time"] = r.sim_time;
  j["rows"] = r.rows;
  j["waypoint_count"] = r.waypoint_count;
  ojson arr = ojson::array();
  for (const auto& a : r.arrivals) {
    arr.push_back({{"index", a.index},
                   {"time", a.time},
                   {"truth_distance", a.truth_distance},
                   {"estimate_distance", a.estimate_distance},
                   {"closest_truth_distance", a.closest_truth_distance},
                   {"within_radius", a.within_radius}});
  }
  j["arrivals"] = arr;
  j["dr_position_error"] = stats_json(r.dr_error);
  j["fused_position_error"] = stats_json(r.fused_error);
  if (r.station_keeping) {
    j["station_keeping"] = {{"waypoint_index", r.station_keeping->waypoint_index},
                            {"duration", r.station_keeping->duration},
                            {"rms", r.station_keeping->rms}};
  } else {
    j["station_keeping"] = nullptr;
  }
  j["gateway_events"] = r.gateway_events;
  j["watchdog_events"] = r.watchdog_events;
  return j.dump(2) + "\n";
}

MissionReport replay(const std::string& path) {
  namespace fs = std::filesystem;
  const fs::path p(path);
  const fs::path dir = fs::is_directory(p) ? p : p.parent_path();
  std::ifstream log(dir / "log.tsv");
  if (!log) throw LogFormatError("cannot open " + (dir / "log.tsv").string());
  std::ifstream events(dir / "events.jsonl");
  if (!events) throw LogFormatError("cannot open " + (dir / "events.jsonl").string());
  const auto rows = read_log(log);
  const auto ev = read_events(events);
  return compute_report(rows, ev);
}

}  // namespace auv
