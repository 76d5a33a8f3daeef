#include "auv/config.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "json.hpp"

namespace auv {

using nlohmann::json;

ConfigError::ConfigError(std::vector<Finding> findings)
    : std::runtime_error([&] {
        std::string msg = "invalid configuration";
        for (const auto& f : findings) msg += "\n  " + f.path + ": " + f.message;
        return msg;
      }()),
      findings_(std::move(findings)) {}

const char* to_string(Transport t) { return t == Transport::kTcp ? "tcp" : "inprocess"; }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

// Typed field access that records findings instead of throwing. Absent keys
// keep whatever value the target already holds.
class Reader {
 public:
  Reader(const json& j, std::string path, std::vector<Finding>& out)
      : j_(j), path_(std::move(path)), out_(out) {}

  bool has(const char* key) const { return j_.is_object() && j_.contains(key); }
  std::string at(const char* key) const { return path_ + "." + key; }
  void fail(const std::string& path, const std::string& msg) const { out_.push_back({path, msg}); }

  Reader child(const char* key) const {
    static const json kEmpty = json::object();
    if (!has(key)) return Reader(kEmpty, at(key), out_);
    if (!j_[key].is_object()) {
      fail(at(key), "expected an object");
      return Reader(kEmpty, at(key), out_);
    }
    return Reader(j_[key], at(key), out_);
  }

  void number(const char* key, double& v, bool required = false) const {
    if (!has(key)) {
      if (required) fail(at(key), "missing");
      return;
    }
    if (!j_[key].is_number()) return fail(at(key), "expected a number");
    v = j_[key].get<double>();
    if (!std::isfinite(v)) fail(at(key), "not finite");
  }

  void integer(const char* key, int& v) const {
    if (!has(key)) return;
    if (!j_[key].is_number_integer()) return fail(at(key), "expected an integer");
    v = j_[key].get<int>();
  }

  void uint64(const char* key, std::uint64_t& v, bool required = false) const {
    if (!has(key)) {
      if (required) fail(at(key), "missing");
      return;
    }
    if (!j_[key].is_number_unsigned()) return fail(at(key), "expected a non-negative integer");
    v = j_[key].get<std::uint64_t>();
  }

  void boolean(const char* key, bool& v) const {
    if (!has(key)) return;
    if (!j_[key].is_boolean()) return fail(at(key), "expected true or false");
    v = j_[key].get<bool>();
  }

  void string(const char* key, std::string& v, bool required = false) const {
    if (!has(key)) {
      if (required) fail(at(key), "missing");
      return;
    }
    if (!j_[key].is_string()) return fail(at(key), "expected a string");
    v = j_[key].get<std::string>();
  }

  template <int N>
  void vector(const char* key, Eigen::Matrix<double, N, 1>& v, bool required = false) const {
    if (!has(key)) {
      if (required) fail(at(key), "missing");
      return;
    }
    read_array(j_[key], at(key), v);
  }

  template <int N>
  bool read_array(const json& a, const std::string& path, Eigen::Matrix<double, N, 1>& v) const {
    if (!a.is_array() || a.size() != static_cast<std::size_t>(N)) {
      fail(path, "expected an array of " + std::to_string(N) + " numbers");
      return false;
    }
    Eigen::Matrix<double, N, 1> tmp;
    for (int i = 0; i < N; ++i) {
      if (!a[i].is_number()) {
        fail(path + "[" + std::to_string(i) + "]", "expected a number");
        return false;
      }
      tmp(i) = a[i].get<double>();
    }
    v = tmp;
    return true;
  }

  const json& raw() const { return j_; }
  const std::string& path() const { return path_; }
  std::vector<Finding>& findings() const { return out_; }

 private:
  const json& j_;
  std::string path_;
  std::vector<Finding>& out_;
};

std::optional<json> parse_text(const std::string& text, const std::string& prefix,
                               std::vector<Finding>& findings) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) {
    findings.push_back({prefix, "not valid JSON"});
    return std::nullopt;
  }
  if (!j.is_object()) {
    findings.push_back({prefix, "expected a JSON object"});
    return std::nullopt;
  }
  return j;
}

void read_inertia(const Reader& r, Mat3& inertia) {
  if (!r.has("inertia")) return;
  const json& a = r.raw()["inertia"];
  const std::string path = r.at("inertia");
  if (a.is_array() && a.size() == 3 && a[0].is_number()) {
    Vec3 d;
    if (r.read_array(a, path, d)) inertia = d.asDiagonal();
    return;
  }
  if (!a.is_array() || a.size() != 3) return r.fail(path, "expected 3 diagonal values or a 3x3 array");
  Mat3 m;
  for (int i = 0; i < 3; ++i) {
    Vec3 row;
    if (!r.read_array(a[i], path + "[" + std::to_string(i) + "]", row)) return;
    m.row(i) = row.transpose();
  }
  inertia = m;
}

void read_vehicle(const Reader& r, VehicleParams& v) {
  r.number("mass", v.mass);
  read_inertia(r, v.inertia);
  r.vector("added_mass", v.added_mass);
  r.vector("linear_damping", v.linear_damping);
  r.vector("quadratic_damping", v.quadratic_damping);
  r.number("weight", v.weight);
  r.number("buoyancy", v.buoyancy);
  r.vector("cob_offset", v.cob_offset);
  r.number("thruster_time_constant", v.thruster_time_constant);
  r.number("max_linear_speed", v.max_linear_speed);
  r.number("max_angular_rate", v.max_angular_rate);
  if (r.has("thrusters")) {
    const json& a = r.raw()["thrusters"];
    if (!a.is_array()) return r.fail(r.at("thrusters"), "expected an array");
    v.thrusters.clear();
    for (std::size_t i = 0; i < a.size(); ++i) {
      const std::string p = r.at("thrusters") + "[" + std::to_string(i) + "]";
      if (!a[i].is_object()) {
        r.fail(p, "expected an object");
        continue;
      }
      Reader t(a[i], p, r.findings());
      Thruster th;
      t.vector("position", th.position, true);
      t.vector("axis", th.axis, true);
      t.number("max_thrust", th.max_thrust);
      v.thrusters.push_back(th);
    }
  }
}

void read_sensors(const Reader& r, SensorSuiteConfig& s) {
  const Reader imu = r.child("imu");
  imu.number("rate_hz", s.imu_rate);
  imu.number("orientation_sigma", s.imu.orientation_sigma);
  imu.number("gyro_noise_sigma", s.imu.gyro_noise_sigma);
  imu.number("gyro_bias_walk_sigma", s.imu.gyro_bias_walk_sigma);
  imu.number("accel_noise_sigma", s.imu.accel_noise_sigma);
  imu.number("heading_bias_sigma", s.imu.heading_bias_sigma);
  imu.number("heading_bias_walk_sigma", s.imu.heading_bias_walk_sigma);
  const Reader depth = r.child("depth");
  depth.number("rate_hz", s.depth_rate);
  depth.number("sigma", s.depth.sigma);
  const Reader dvl = r.child("dvl");
  dvl.number("rate_hz", s.dvl_rate);
  dvl.number("sigma0", s.dvl.sigma0);
  dvl.number("sigma_scale", s.dvl.sigma_scale);
  dvl.number("min_range", s.dvl.min_range);
  dvl.number("max_range", s.dvl.max_range);
  dvl.number("scale_error_sigma", s.dvl.scale_error_sigma);
  const Reader odom = r.child("external_odometry");
  odom.boolean("enabled", s.odom_enabled);
  odom.number("rate_hz", s.odom_rate);
  odom.number("position_sigma", s.odom.position_sigma);
  odom.number("orientation_sigma", s.odom.orientation_sigma);
  odom.number("bias_bound", s.odom.bias_bound);
  odom.number("bias_walk_sigma", s.odom.bias_walk_sigma);
  odom.number("bias_time_constant", s.odom.bias_time_constant);
  odom.number("availability", s.odom.availability);
}

void read_ekf(const Reader& r, EkfConfig& e) {
  r.number("q_position", e.q_position);
  r.number("q_attitude", e.q_attitude);
  r.number("q_velocity", e.q_velocity);
  r.number("imu_orientation_sigma", e.imu_orientation_sigma);
  r.number("depth_sigma", e.depth_sigma);
  r.number("dvl_sigma0", e.dvl_sigma0);
  r.number("dvl_sigma_scale", e.dvl_sigma_scale);
  r.number("gate_depth", e.gate_depth);
  r.number("gate_dvl", e.gate_dvl);
  r.number("gate_imu", e.gate_imu);
  r.number("gate_odom", e.gate_odom);
  r.number("initial_position_sigma", e.initial_position_sigma);
  r.number("initial_attitude_sigma", e.initial_attitude_sigma);
  r.number("initial_velocity_sigma", e.initial_velocity_sigma);
}

const char* kAxisNames[6] = {"surge", "sway", "heave", "roll", "pitch", "yaw"};

void read_control(const Reader& r, ControlConfig& c) {
  const Reader outer = r.child("outer");
  outer.vector("kp", c.outer.kp);
  outer.vector("max_linear_speed", c.outer.max_linear_speed);
  outer.vector("max_angular_rate", c.outer.max_angular_rate);
  const Reader inner = r.child("inner");
  for (int i = 0; i < 6; ++i) {
    const Reader a = inner.child(kAxisNames[i]);
    a.number("kp", c.inner[i].kp);
    a.number("ki", c.inner[i].ki);
    a.number("kd", c.inner[i].kd);
    a.number("integrator_limit", c.inner[i].integrator_limit);
    a.number("output_limit", c.inner[i].output_limit);
  }
}

void read_planner(const Reader& r, PlannerParams& p) {
  r.integer("max_iterations", p.max_iterations);
  r.number("step_size", p.step_size);
  r.number("goal_bias", p.goal_bias);
  r.number("gamma_scale", p.gamma_scale);
  r.number("goal_tolerance", p.goal_tolerance);
  std::string sampler;
  r.string("sampler", sampler);
  if (sampler == "direct") p.sampler = InformedSampler::kDirect;
  else if (sampler == "rejection") p.sampler = InformedSampler::kRejection;
  else if (!sampler.empty()) r.fail(r.at("sampler"), "expected \"direct\" or \"rejection\"");
}

Aabb read_box(const Reader& r) {
  Aabb b;
  r.vector("min", b.min, true);
  r.vector("max", b.max, true);
  return b;
}

void read_world(const Reader& r, World& w) {
  if (r.has("bounds")) w.bounds = read_box(r.child("bounds"));
  r.number("inflation", w.inflation);
  if (!r.has("obstacles")) return;
  const json& a = r.raw()["obstacles"];
  if (!a.is_array()) return r.fail(r.at("obstacles"), "expected an array");
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::string p = r.at("obstacles") + "[" + std::to_string(i) + "]";
    if (!a[i].is_object()) {
      r.fail(p, "expected an object");
      continue;
    }
    Reader o(a[i], p, r.findings());
    std::string type;
    o.string("type", type, true);
    if (type == "sphere") {
      Sphere s;
      o.vector("centre", s.centre, true);
      o.number("radius", s.radius, true);
      w.obstacles.push_back(s);
    } else if (type == "box") {
      w.obstacles.push_back(read_box(o));
    } else if (!type.empty()) {
      o.fail(o.at("type"), "expected \"sphere\" or \"box\"");
    }
  }
}

}  // namespace

VehicleConfig default_vehicle_config() {
  VehicleConfig c;
  c.vehicle = default_vehicle();

  c.sensors.imu = {.orientation_sigma = 0.005,
                   .gyro_noise_sigma = 0.002,
                   .gyro_bias_walk_sigma = 1e-4,
                   .accel_noise_sigma = 0.02,
                   .heading_bias_sigma = 0.005,
                   .heading_bias_walk_sigma = 2e-4};
  c.sensors.depth = {.sigma = 0.02};
  c.sensors.dvl = {.sigma0 = 0.01,
                   .sigma_scale = 0.01,
                   .min_range = 0.05,
                   .max_range = 50.0,
                   .scale_error_sigma = 0.005};
  c.sensors.odom = {.position_sigma = 0.05,
                    .orientation_sigma = 0.01,
                    .bias_bound = 0.15,
                    .bias_walk_sigma = 0.01,
                    .bias_time_constant = 60.0,
                    .availability = 0.95};

  c.ekf.imu_orientation_sigma = 0.005;
  c.ekf.depth_sigma = 0.02;
  c.ekf.dvl_sigma0 = 0.01;
  c.ekf.dvl_sigma_scale = 0.01;

  c.control.outer.kp << 0.6, 0.6, 0.8, 1.0, 1.0, 1.0;
  c.control.outer.max_linear_speed = Vec3(0.5, 0.5, 0.3);
  c.control.outer.max_angular_rate = Vec3(0.5, 0.5, 0.5);
  c.control.inner = {{
      {40.0, 8.0, 0.0, 20.0, 80.0},
      {50.0, 10.0, 0.0, 20.0, 80.0},
      {50.0, 10.0, 0.0, 20.0, 80.0},
      {3.0, 0.5, 0.0, 2.0, 10.0},
      {3.0, 0.5, 0.0, 2.0, 10.0},
      {3.0, 0.5, 0.0, 2.0, 10.0},
  }};
  return c;
}

VehicleConfig parse_vehicle_config(const std::string& text, std::vector<Finding>& findings,
                                   const std::string& prefix) {
  VehicleConfig c = default_vehicle_config();
  const auto j = parse_text(text, prefix, findings);
  if (!j) return c;
  const Reader r(*j, prefix, findings);
  read_vehicle(r.child("vehicle"), c.vehicle);
  read_sensors(r.child("sensors"), c.sensors);
  read_ekf(r.child("estimation"), c.ekf);
  read_control(r.child("control"), c.control);
  const Reader pilot = r.child("pilot");
  pilot.number("lookahead", c.pilot.lookahead);
  pilot.number("replan_cross_track", c.pilot.replan_cross_track);
  read_planner(r.child("planner"), c.pilot.planner);
  const Reader align = r.child("alignment");
  align.number("smoothing", c.alignment.smoothing);
  align.number("pairing_window", c.alignment.pairing_window);
  r.child("gateway").number("watchdog_timeout", c.watchdog_timeout);
  const Reader bat = r.child("battery");
  bat.number("full_voltage", c.battery.full_voltage);
  bat.number("empty_voltage", c.battery.empty_voltage);
  bat.number("capacity_wh", c.battery.capacity_wh);
  bat.number("hotel_power_w", c.battery.hotel_power_w);
  bat.number("power_per_newton_w", c.battery.power_per_newton_w);
  return c;
}

MissionSpec parse_mission(const std::string& text, std::vector<Finding>& findings,
                          const std::string& prefix) {
  MissionSpec m;
  const auto j = parse_text(text, prefix, findings);
  if (!j) return m;
  const Reader r(*j, prefix, findings);

  const Reader start = r.child("start");
  start.vector("position", m.start.position, true);
  double yaw = 0.0;
  start.number("yaw", yaw);
  m.start.orientation = quat_from_euler(0.0, 0.0, yaw);

  const Reader env = r.child("environment");
  env.vector("current", m.environment.current);
  env.number("water_density", m.environment.water_density);
  env.number("seabed_depth", m.environment.seabed_depth);

  read_world(r.child("world"), m.world);

  if (!r.has("waypoints")) {
    findings.push_back({r.at("waypoints"), "missing"});
    return m;
  }
  const json& a = (*j)["waypoints"];
  if (!a.is_array()) {
    findings.push_back({r.at("waypoints"), "expected an array"});
    return m;
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::string p = r.at("waypoints") + "[" + std::to_string(i) + "]";
    if (!a[i].is_object()) {
      findings.push_back({p, "expected an object"});
      continue;
    }
    Reader w(a[i], p, findings);
    Waypoint wp;
    w.vector("position", wp.position, true);
    if (w.has("heading")) {
      double h = 0.0;
      w.number("heading", h);
      wp.heading = h;
    }
    w.number("acceptance_radius", wp.acceptance_radius);
    w.number("hold", wp.hold);
    w.boolean("planned", wp.planned);
    m.mission.waypoints.push_back(wp);
  }
  return m;
}

RunConfig parse_run_config(const std::string& text, std::vector<Finding>& findings,
                           const std::string& prefix) {
  RunConfig c;
  const auto j = parse_text(text, prefix, findings);
  if (!j) return c;
  const Reader r(*j, prefix, findings);
  r.string("vehicle", c.vehicle_path, true);
  r.string("mission", c.mission_path, true);
  r.uint64("seed", c.seed, true);
  r.number("duration", c.duration, true);
  std::string transport;
  r.string("transport", transport);
  if (transport == "tcp") c.transport = Transport::kTcp;
  else if (transport == "inprocess" || transport.empty()) c.transport = Transport::kInProcess;
  else r.fail(r.at("transport"), "expected \"inprocess\" or \"tcp\"");
  const Reader tcp = r.child("tcp");
  tcp.string("host", c.tcp_host);
  tcp.integer("port", c.tcp_port);
  r.string("log_dir", c.log_dir);
  const Reader rates = r.child("rates");
  rates.number("sim_hz", c.sim_rate);
  rates.number("telemetry_hz", c.telemetry_rate);
  if (r.has("external_odometry")) {
    bool b = true;
    r.boolean("external_odometry", b);
    c.external_odometry = b;
  }
  std::string ctl;
  r.string("backseat_control", ctl);
  if (ctl == "velocity") c.backseat_control = BackseatControl::kVelocity;
  else if (ctl == "position") c.backseat_control = BackseatControl::kPosition;
  else if (ctl == "wrench" || ctl.empty()) c.backseat_control = BackseatControl::kWrench;
  else r.fail(r.at("backseat_control"), "expected \"wrench\", \"velocity\" or \"position\"");
  r.boolean("dump_tree", c.dump_tree);
  return c;
}

std::vector<Finding> validate_vehicle(const VehicleParams& v, const std::string& prefix) {
  std::vector<Finding> f;
  const auto add = [&](const std::string& key, const std::string& msg) {
    f.push_back({prefix + "." + key, msg});
  };
  if (!(v.mass > 0.0)) add("mass", "must be positive (kg)");
  if (v.mass > 1e4) add("mass", "implausibly large for kg");
  const Eigen::SelfAdjointEigenSolver<Mat3> eig(0.5 * (v.inertia + v.inertia.transpose()));
  if ((v.inertia - v.inertia.transpose()).norm() > 1e-9 || eig.eigenvalues().minCoeff() <= 0.0)
    add("inertia", "must be symmetric positive definite (kg m^2)");
  if ((v.added_mass.array() < 0.0).any()) add("added_mass", "must be non-negative");
  if ((v.linear_damping.array() < 0.0).any()) add("linear_damping", "must be non-negative");
  if ((v.quadratic_damping.array() < 0.0).any()) add("quadratic_damping", "must be non-negative");
  if (!(v.weight > 0.0)) add("weight", "must be positive (N)");
  if (v.mass > 0.0 && std::abs(v.weight / v.mass - kGravity) > 0.5)
    add("weight", "should be mass times 9.81 m/s^2 (N, not kg)");
  if (!(v.buoyancy > 0.0)) add("buoyancy", "must be positive (N)");
  if (v.weight > 0.0 && std::abs(v.buoyancy - v.weight) > 0.25 * v.weight)
    add("buoyancy", "differs from weight by more than 25 %");
  if (v.cob_offset.norm() > 1.0) add("cob_offset", "larger than 1 m");
  if (v.thruster_time_constant < 0.0) add("thruster_time_constant", "must be non-negative (s)");
  if (!(v.max_linear_speed > 0.0)) add("max_linear_speed", "must be positive (m/s)");
  if (!(v.max_angular_rate > 0.0)) add("max_angular_rate", "must be positive (rad/s)");

  if (v.thrusters.size() != kThrusterCount) {
    add("thrusters", "expected " + std::to_string(kThrusterCount) + " thrusters, got " +
                         std::to_string(v.thrusters.size()));
  }
  for (std::size_t i = 0; i < v.thrusters.size(); ++i) {
    const Thruster& t = v.thrusters[i];
    const std::string p = "thrusters[" + std::to_string(i) + "]";
    if (std::abs(t.axis.norm() - 1.0) > 1e-6) add(p + ".axis", "must be a unit vector");
    if (!(t.max_thrust > 0.0)) add(p + ".max_thrust", "must be positive (N)");
    if (t.position.norm() > 2.0) add(p + ".position", "more than 2 m from the centre of gravity");
  }
  if (!v.thrusters.empty()) {
    const int rank = matrix_rank(allocation_matrix(v.thrusters));
    if (rank < 6) add("thrusters", "allocation matrix has rank " + std::to_string(rank) + ", need 6");
  }
  return f;
}

namespace {

void check_rate(std::vector<Finding>& f, const std::string& path, double rate, double base) {
  if (!(rate > 0.0)) {
    f.push_back({path, "must be positive (Hz)"});
    return;
  }
  try {
    period_in_ticks(rate, base);
  } catch (const std::exception&) {
    f.push_back({path, "must divide the simulator rate"});
  }
}

}  // namespace

std::vector<Finding> validate(const LoadedRun& cfg) {
  std::vector<Finding> f = validate_vehicle(cfg.vehicle.vehicle, "vehicle.vehicle");
  const auto add = [&](std::string p, std::string m) { f.push_back({std::move(p), std::move(m)}); };

  const RunConfig& run = cfg.run;
  if (!(run.duration > 0.0)) add("run.duration", "must be positive (s)");
  if (!(run.sim_rate > 0.0) || run.sim_rate > 1000.0) add("run.rates.sim_hz", "must be in (0, 1000] Hz");
  else if (1.0 / run.sim_rate > 0.1) add("run.rates.sim_hz", "time step above 0.1 s");
  if (run.sim_rate > 0.0) {
    check_rate(f, "run.rates.telemetry_hz", run.telemetry_rate, run.sim_rate);
    const SensorSuiteConfig& s = cfg.vehicle.sensors;
    check_rate(f, "vehicle.sensors.imu.rate_hz", s.imu_rate, run.sim_rate);
    check_rate(f, "vehicle.sensors.depth.rate_hz", s.depth_rate, run.sim_rate);
    check_rate(f, "vehicle.sensors.dvl.rate_hz", s.dvl_rate, run.sim_rate);
    check_rate(f, "vehicle.sensors.external_odometry.rate_hz", s.odom_rate, run.sim_rate);
  }
  if (run.transport == Transport::kTcp && (run.tcp_port < 0 || run.tcp_port > 65535))
    add("run.tcp.port", "must be in [0, 65535]");

  const SensorSuiteConfig& s = cfg.vehicle.sensors;
  if (s.odom.availability < 0.0 || s.odom.availability > 1.0)
    add("vehicle.sensors.external_odometry.availability", "must be a probability");
  if (s.odom.bias_time_constant <= 0.0)
    add("vehicle.sensors.external_odometry.bias_time_constant", "must be positive (s)");
  if (s.dvl.min_range < 0.0 || s.dvl.max_range <= s.dvl.min_range)
    add("vehicle.sensors.dvl", "need 0 <= min_range < max_range (m)");

  const EkfConfig& e = cfg.vehicle.ekf;
  if (e.q_position < 0.0 || e.q_attitude < 0.0 || e.q_velocity < 0.0)
    add("vehicle.estimation", "process noise densities must be non-negative");
  if (!(e.imu_orientation_sigma > 0.0) || !(e.depth_sigma > 0.0) || !(e.dvl_sigma0 > 0.0))
    add("vehicle.estimation", "measurement sigmas must be positive");

  const double a = cfg.vehicle.alignment.smoothing;
  if (!(a > 0.0 && a <= 1.0)) add("vehicle.alignment.smoothing", "must be in (0, 1]");
  if (!(cfg.vehicle.watchdog_timeout > 0.0)) add("vehicle.gateway.watchdog_timeout", "must be positive (s)");
  const PlannerParams& pp = cfg.vehicle.pilot.planner;
  if (pp.max_iterations <= 0) add("vehicle.planner.max_iterations", "must be positive");
  if (!(pp.step_size > 0.0)) add("vehicle.planner.step_size", "must be positive (m)");
  if (pp.goal_bias < 0.0 || pp.goal_bias > 1.0) add("vehicle.planner.goal_bias", "must be in [0, 1]");
  if (!(cfg.vehicle.pilot.lookahead > 0.0)) add("vehicle.pilot.lookahead", "must be positive (m)");

  const World& w = cfg.mission.world;
  if ((w.bounds.max.array() <= w.bounds.min.array()).any())
    add("mission.world.bounds", "max must exceed min on every axis");
  if (w.inflation < 0.0) add("mission.world.inflation", "must be non-negative (m)");
  for (std::size_t i = 0; i < w.obstacles.size(); ++i) {
    const std::string p = "mission.world.obstacles[" + std::to_string(i) + "]";
    if (const auto* sp = std::get_if<Sphere>(&w.obstacles[i])) {
      if (!(sp->radius > 0.0)) add(p + ".radius", "must be positive (m)");
    } else {
      const auto& b = std::get<Aabb>(w.obstacles[i]);
      if ((b.max.array() < b.min.array()).any()) add(p, "max must not be below min");
    }
  }
  if (!w.bounds.contains(cfg.mission.start.position)) add("mission.start.position", "outside world bounds");
  else if (!point_free(cfg.mission.start.position, w)) add("mission.start.position", "inside an obstacle");
  if (cfg.mission.start.position.z() < 0.0) add("mission.start.position", "above the surface (z is down)");
  if (cfg.mission.environment.seabed_depth <= 0.0) add("mission.environment.seabed_depth", "must be positive (m)");

  const auto& wps = cfg.mission.mission.waypoints;
  for (std::size_t i = 0; i < wps.size(); ++i) {
    const std::string p = "mission.waypoints[" + std::to_string(i) + "]";
    if (!w.bounds.contains(wps[i].position)) add(p + ".position", "outside world bounds");
    else if (!point_free(wps[i].position, w)) add(p + ".position", "inside an obstacle");
    if (!(wps[i].acceptance_radius > 0.0)) add(p + ".acceptance_radius", "must be positive (m)");
    if (wps[i].hold < 0.0) add(p + ".hold", "must be non-negative (s)");
  }
  return f;
}

LoadResult load_run(const std::string& run_path) {
  LoadResult out;
  std::string text;
  try {
    text = read_file(run_path);
  } catch (const std::exception& e) {
    out.findings.push_back({"run", e.what()});
    return out;
  }
  LoadedRun cfg;
  cfg.run = parse_run_config(text, out.findings);
  if (!out.findings.empty()) return out;

  const std::filesystem::path base = std::filesystem::path(run_path).parent_path();
  const auto resolve = [&](const std::string& p) {
    const std::filesystem::path q(p);
    return (q.is_absolute() ? q : base / q).lexically_normal().string();
  };
  cfg.run.vehicle_path = resolve(cfg.run.vehicle_path);
  cfg.run.mission_path = resolve(cfg.run.mission_path);
  try {
    cfg.vehicle = parse_vehicle_config(read_file(cfg.run.vehicle_path), out.findings);
  } catch (const std::exception& e) {
    out.findings.push_back({"run.vehicle", e.what()});
  }
  try {
    cfg.mission = parse_mission(read_file(cfg.run.mission_path), out.findings);
  } catch (const std::exception& e) {
    out.findings.push_back({"run.mission", e.what()});
  }
  if (!out.findings.empty()) return out;
  if (cfg.run.external_odometry) cfg.vehicle.sensors.odom_enabled = *cfg.run.external_odometry;

  out.findings = validate(cfg);
  if (out.findings.empty()) out.run = std::move(cfg);
  return out;
}

}  // namespace auv
