#include "auv/backseat.hpp"

#include <cmath>
#include <cstdio>
#include <type_traits>

namespace auv {

Backseat::Backseat(const VehicleConfig& cfg, const MissionSpec& mission, BackseatControl control,
                   std::uint64_t seed, double tick_period)
    : cfg_(cfg),
      mission_(mission),
      control_mode_(control),
      seed_(seed),
      tick_period_(tick_period),
      fused_(cfg.ekf, mission.start, 0.0),
      pilot_params_(cfg.pilot),
      controller_(cfg.control.outer, cfg.control.inner) {
  alignment_.smoothing = cfg.alignment.smoothing;
  alignment_.pairing_window = cfg.alignment.pairing_window;
  pilot_params_.planner.seed = seed_;
}

std::vector<LoggedEvent> Backseat::take_events() {
  std::vector<LoggedEvent> out;
  out.swap(events_);
  return out;
}

std::vector<PlanResult> Backseat::take_plans() {
  std::vector<PlanResult> out;
  out.swap(plans_);
  return out;
}

void Backseat::event(double t, std::string kind, std::string detail) {
  events_.push_back({t, kBackseatSource, std::move(kind), std::move(detail)});
}

void Backseat::fuse_odom_until(double t) {
  while (!odom_queue_.empty() && odom_queue_.front().timestamp <= t) {
    const ExternalOdomReading r = odom_queue_.front();
    odom_queue_.pop_front();
    ++counters_.odom;
    const UpdateOutcome o = fused_.on_external_odom(r);
    if (o == UpdateOutcome::kGated) {
      ++counters_.gated;
      event(r.timestamp, "estimator.gated", "external odometry");
    }
  }
}

void Backseat::on_sensor(const SensorData& s, double t) {
  std::visit(
      [&](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        UpdateOutcome o = UpdateOutcome::kAccepted;
        const char* name = "";
        if constexpr (std::is_same_v<T, ImuReading>) {
          name = "imu";
          ++counters_.imu;
          try {
            fused_.on_imu(r);
          } catch (const EkfError& e) {
            event(t, "estimator.rejected", std::string("imu: ") + e.what());
          }
        } else if constexpr (std::is_same_v<T, DepthReading>) {
          name = "depth";
          ++counters_.depth;
          o = fused_.on_depth(r);
        } else if constexpr (std::is_same_v<T, DvlReading>) {
          name = "dvl";
          ++counters_.dvl;
          if (r.bottom_lock) ++counters_.dvl_lock;
          o = fused_.on_dvl(r);
        } else {
          name = "odom";
          ++counters_.odom;
          o = fused_.on_external_odom(r);
        }
        if (o == UpdateOutcome::kGated) {
          ++counters_.gated;
          event(t, "estimator.gated", name);
        }
      },
      s.reading);
}

std::string Backseat::process() {
  std::string out;
  while (auto rx = in_.next()) {
    if (rx->error) {
      event(last_tick_time_.value_or(0.0), "protocol.error", rx->error->field + ": " + rx->error->message);
      continue;
    }
    const Message& m = *rx->message;
    const double t = m.header.timestamp;
    if (rx->stale) {
      event(t, "protocol.stale", m.header.source + " seq " + std::to_string(m.header.seq));
      continue;
    }
    if (const auto* s = std::get_if<SensorData>(&m.body)) {
      // Odometry stamped at the same instant is fused after the IMU predict.
      fuse_odom_until(std::nextafter(t, -1.0));
      on_sensor(*s, t);
    } else if (const auto* tel = std::get_if<Telemetry>(&m.body)) {
      fuse_odom_until(t);
      run_tick(*tel, t, out);
    } else if (const auto* ack = std::get_if<Ack>(&m.body)) {
      if (!ack->accepted) {
        ++acks_rejected_;
        event(t, "command.rejected", std::to_string(ack->command_id) + ": " + ack->reason);
      }
    } else {
      event(t, "protocol.ignored", std::string(type_name(m)) + " from " + m.header.source);
    }
  }
  return out;
}

void Backseat::run_tick(const Telemetry& tel, double t, std::string& out) {
  double dt = tick_period_;
  if (last_tick_time_ && t > *last_tick_time_) dt = t - *last_tick_time_;
  last_tick_time_ = t;
  ++ticks_;

  const EkfState& est = fused_.state();
  const bool valid = fused_.initialized() && covariance_valid(est.covariance) &&
                     horizontal_covariance_trace(est) < 1e4;
  const Pose fused_pose = est.pose();
  const Twist fused_twist{est.velocity(), fused_.last_angular_rate()};

  alignment_ = align_frames({tel.pose, t}, {fused_pose, est.timestamp}, alignment_, t);
  const bool aligned_now = !alignment_.stale && alignment_.has_update && alignment_.last_update == t;
  if (alignment_.stale) event(t, "alignment.stale", "pose pair outside the pairing window");

  const bool was_safety_hold = snapshot_.safety_hold;
  if (!pilot_.started) pilot_ = start_mission(pilot_, t);
  PilotOutput po = tick(pilot_, fused_pose, mission_.mission, mission_.world, pilot_params_, t, valid);
  pilot_ = po.state;
  if (po.transition) {
    event(t, "pilot.transition",
          std::string(to_string(po.transition->from)) + "->" + to_string(po.transition->to) +
              " wp " + std::to_string(po.transition->waypoint_index));
  }
  if (po.plan) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s cost %.6g nodes %zu first_solution %d", to_string(po.plan->outcome),
                  po.plan->path.cost, po.plan->node_count, po.plan->first_solution_iteration);
    event(t, "planner", buf);
    plans_.push_back(std::move(*po.plan));
  }
  if (po.safety_hold != was_safety_hold) {
    event(t, "pilot.safety_hold", po.safety_hold ? "estimator invalid, holding" : "estimator recovered");
  }

  if (aligned_now) out += writer_.write(t, TransformUpdate{alignment_.transform});

  Command cmd;
  cmd.id = next_command_id_++;
  Wrench wrench;
  switch (control_mode_) {
    case BackseatControl::kWrench:
      wrench = controller_.update(po.setpoint, fused_pose, fused_twist, dt).wrench;
      cmd.body = wrench;
      break;
    case BackseatControl::kVelocity:
      if (po.setpoint.mode() == SetpointMode::kVelocity) cmd.body = std::get<Twist>(po.setpoint.target);
      else cmd.body = outer_loop(std::get<Pose>(po.setpoint.target), fused_pose, cfg_.control.outer);
      break;
    case BackseatControl::kPosition:
      if (po.setpoint.mode() == SetpointMode::kPosition) cmd.body = std::get<Pose>(po.setpoint.target);
      else cmd.body = controller_.update(po.setpoint, fused_pose, fused_twist, dt).wrench;
      break;
  }
  out += writer_.write(t, cmd);
  out += writer_.write(t, Heartbeat{});

  snapshot_.t = t;
  snapshot_.fused_pose = fused_pose;
  snapshot_.fused_twist = fused_twist;
  snapshot_.fused_cov_h = horizontal_covariance_trace(est);
  snapshot_.estimator_valid = valid;
  snapshot_.alignment = alignment_;
  snapshot_.pilot = pilot_;
  snapshot_.setpoint = po.setpoint;
  snapshot_.safety_hold = po.safety_hold;
  snapshot_.wrench = wrench;
  snapshot_.counters = counters_;
  snapshot_.acks_rejected = acks_rejected_;
}

}  // namespace auv
