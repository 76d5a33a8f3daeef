#include "auv/frontseat.hpp"

#include <algorithm>

namespace auv {

namespace {

enum RngStream : std::uint64_t { kImuStream = 1, kDepthStream = 2, kDvlStream = 3 };

// The frontseat never sees a position fix.
EkfConfig dead_reckoning_config(EkfConfig c) {
  c.consider_horizontal_position = true;
  return c;
}

SimState initial_state(const MissionSpec& m) {
  SimState s;
  s.pose = m.start;
  return s;
}

}  // namespace

Frontseat::Frontseat(const VehicleConfig& cfg, const MissionSpec& mission, double sim_rate,
                     double telemetry_rate, std::uint64_t seed)
    : cfg_(cfg),
      env_(mission.environment),
      sim_rate_(sim_rate),
      dt_(1.0 / sim_rate),
      imu_sched_{period_in_ticks(cfg.sensors.imu_rate, sim_rate)},
      depth_sched_{period_in_ticks(cfg.sensors.depth_rate, sim_rate)},
      dvl_sched_{period_in_ticks(cfg.sensors.dvl_rate, sim_rate)},
      telemetry_sched_{period_in_ticks(telemetry_rate, sim_rate)},
      truth_(initial_state(mission)),
      imu_(cfg.sensors.imu),
      dvl_(cfg.sensors.dvl),
      imu_rng_(make_rng(seed, kImuStream)),
      depth_rng_(make_rng(seed, kDepthStream)),
      dvl_rng_(make_rng(seed, kDvlStream)),
      dr_(dead_reckoning_config(cfg.ekf), mission.start, 0.0),
      controller_(cfg.control.outer, cfg.control.inner),
      allocator_(mixer_matrix(cfg.vehicle), max_thrusts(cfg.vehicle)) {
  gateway_.watchdog_timeout = cfg.watchdog_timeout;
}

std::vector<LoggedEvent> Frontseat::take_events() {
  std::vector<LoggedEvent> out;
  out.swap(events_);
  return out;
}

void Frontseat::event(std::string kind, std::string detail) {
  events_.push_back({time(), kFrontseatSource, std::move(kind), std::move(detail)});
}

Twist Frontseat::dr_twist() const { return {dr_.state().velocity(), dr_.last_angular_rate()}; }

void Frontseat::apply(const ArbitrationResult& r) {
  gateway_ = r.state;
  for (const auto& e : r.effects.events) {
    // Transform updates arrive every backseat tick; only the first is logged.
    if (e.kind == "transform" && transform_logged_) continue;
    if (e.kind == "transform") transform_logged_ = true;
    event("gateway." + e.kind, e.detail);
  }
}

void Frontseat::drain(MessageReader& reader, std::string& out) {
  const bool backseat_link = &reader == &backseat_in_;
  const std::string expected = backseat_link ? kBackseatSource : kOperatorSource;
  while (auto rx = reader.next()) {
    for (const auto& w : rx->warnings) event("protocol.warning", w);
    if (rx->error) {
      event("protocol.error", rx->error->field + ": " + rx->error->message);
      continue;
    }
    if (rx->stale) {
      event("protocol.stale", rx->message->header.source + " seq " +
                                  std::to_string(rx->message->header.seq));
      continue;
    }
    const Message& m = *rx->message;
    if (m.header.source != expected) {
      event("protocol.rejected", "source '" + m.header.source + "' on the " + expected + " link");
      continue;
    }
    const auto r = arbitrate(gateway_, m, time(), dr_.state().pose());
    apply(r);
    if (r.effects.ack) {
      if (backseat_link) out += writer_.write(time(), *r.effects.ack);
      else event("operator.ack", std::to_string(r.effects.ack->command_id) +
                                     (r.effects.ack->accepted ? " accepted" : " rejected"));
    }
  }
}

ThrustVector Frontseat::control(Wrench& wrench) {
  wrench = Wrench{};
  if (!gateway_.armed || !gateway_.setpoint) {
    active_mode_.reset();
    controller_.reset();
    return ThrustVector::Zero();
  }
  const ControlSetpoint& sp = *gateway_.setpoint;
  if (active_mode_ != sp.mode()) {
    controller_.reset();
    active_mode_ = sp.mode();
  }
  if (sp.mode() == SetpointMode::kWrench) wrench = std::get<Wrench>(sp.target);
  else wrench = controller_.update(sp, dr_.state().pose(), dr_twist(), dt_).wrench;
  return allocator_.allocate(wrench).thrusts;
}

std::string Frontseat::step() {
  std::string out;
  telemetry_sent_ = false;
  const double t = time();

  drain(operator_in_, out);
  drain(backseat_in_, out);
  apply(check_watchdog(gateway_, t, dr_.state().pose()));

  if (imu_sched_.due(tick_)) {
    const ImuReading r = imu_.sample(truth_, imu_rng_);
    dr_.on_imu(r);
    ++counters_.imu;
    out += writer_.write(t, SensorData{r});
  }
  if (depth_sched_.due(tick_)) {
    const DepthReading r = sample_depth(truth_, cfg_.sensors.depth, depth_rng_);
    if (dr_.on_depth(r) == UpdateOutcome::kGated) ++counters_.gated;
    ++counters_.depth;
    out += writer_.write(t, SensorData{r});
  }
  if (dvl_sched_.due(tick_)) {
    const DvlReading r = dvl_.sample(truth_, env_, dvl_rng_);
    if (dr_.on_dvl(r) == UpdateOutcome::kGated) ++counters_.gated;
    ++counters_.dvl;
    if (r.bottom_lock) ++counters_.dvl_lock;
    if (r.bottom_lock != last_lock_) event("dvl", r.bottom_lock ? "bottom lock acquired" : "bottom lock lost");
    last_lock_ = r.bottom_lock;
    out += writer_.write(t, SensorData{r});
  }

  Wrench wrench;
  const ThrustVector cmd = control(wrench);

  const double soc = std::max(0.0, 1.0 - energy_used_wh_ / cfg_.battery.capacity_wh);
  const double voltage =
      cfg_.battery.empty_voltage + (cfg_.battery.full_voltage - cfg_.battery.empty_voltage) * soc;

  if (telemetry_sched_.due(tick_)) {
    Telemetry tel;
    tel.pose = dr_.state().pose();
    tel.twist = dr_twist();
    tel.depth = tel.pose.position.z();
    tel.battery_voltage = voltage;
    tel.leak = false;
    out += writer_.write(t, tel);
    telemetry_sent_ = true;

    snapshot_.tick = tick_;
    snapshot_.t = t;
    snapshot_.truth = truth_;
    snapshot_.dr_pose = tel.pose;
    snapshot_.dr_twist = tel.twist;
    snapshot_.dr_cov_h = horizontal_covariance_trace(dr_.state());
    snapshot_.mode = gateway_.mode;
    snapshot_.armed = gateway_.armed;
    snapshot_.wrench = wrench;
    snapshot_.thrust_cmd = cmd;
    snapshot_.battery_voltage = voltage;
    snapshot_.counters = counters_;
  }

  truth_ = auv::step(truth_, cmd, env_, cfg_.vehicle, dt_);
  const double power = cfg_.battery.hotel_power_w + cfg_.battery.power_per_newton_w * truth_.thrust.cwiseAbs().sum();
  energy_used_wh_ += power * dt_ / 3600.0;
  ++tick_;
  // Keep the plant clock on the integer tick grid.
  truth_.time = time();
  return out;
}

}  // namespace auv
