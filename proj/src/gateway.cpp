#include "auv/gateway.hpp"

#include <algorithm>

namespace auv {

Pose level_hold(const Pose& p) { return {p.position, quat_from_euler(0.0, 0.0, yaw_of(p.orientation))}; }

Pose to_dr_frame(const GatewayState& g, const Pose& backseat_pose) {
  return apply(inverse(g.transform), backseat_pose);
}

namespace {

void set_mode(GatewayState& g, GatewayMode next, double t, const Pose& dr_pose, GatewayEffects& fx,
              const std::string& why) {
  if (g.mode == next) return;
  fx.events.push_back({"mode", std::string(to_string(g.mode)) + "->" + to_string(next) + " (" + why + ")"});
  g.mode = next;
  switch (next) {
    case GatewayMode::kManual:
      g.setpoint.reset();
      break;
    case GatewayMode::kVelocity:
      g.setpoint = ControlSetpoint::velocity(Twist{});
      break;
    case GatewayMode::kPosition:
    case GatewayMode::kAutonomous:
      g.setpoint = ControlSetpoint::position(level_hold(dr_pose));
      break;
  }
  if (next == GatewayMode::kAutonomous) g.autonomy_since = t;
  fx.forwarded = g.setpoint;
}

bool accepts(GatewayMode mode, SetpointMode sp) {
  switch (mode) {
    case GatewayMode::kManual: return false;
    case GatewayMode::kVelocity: return sp == SetpointMode::kVelocity;
    case GatewayMode::kPosition: return sp == SetpointMode::kPosition;
    case GatewayMode::kAutonomous: return true;
  }
  return false;
}

Ack reply(const Command& c, bool ok, std::string reason) { return Ack{c.id, ok, std::move(reason)}; }

void handle_command(GatewayState& g, const Command& c, const std::string& source, double t,
                    const Pose& dr_pose, GatewayEffects& fx) {
  if (source == kBackseatSource && g.mode == GatewayMode::kManual) {
    fx.ack = reply(c, false, "mode");
    return;
  }
  if (std::holds_alternative<Arm>(c.body)) {
    g.armed = true;
    fx.ack = reply(c, true, "");
    return;
  }
  if (std::holds_alternative<Disarm>(c.body)) {
    g.armed = false;
    set_mode(g, GatewayMode::kManual, t, dr_pose, fx, "disarmed");
    fx.ack = reply(c, true, "");
    return;
  }
  if (const auto* req = std::get_if<ModeRequest>(&c.body)) {
    if (req->mode == GatewayMode::kAutonomous && !g.armed) {
      fx.ack = reply(c, false, "unarmed");
      return;
    }
    set_mode(g, req->mode, t, dr_pose, fx, "requested by " + source);
    fx.ack = reply(c, true, "");
    return;
  }

  ControlSetpoint sp;
  if (const auto* tw = std::get_if<Twist>(&c.body)) sp = ControlSetpoint::velocity(*tw);
  else if (const auto* p = std::get_if<Pose>(&c.body)) sp = ControlSetpoint::position(to_dr_frame(g, *p));
  else sp = ControlSetpoint::wrench(std::get<Wrench>(c.body));

  if (!accepts(g.mode, sp.mode())) {
    fx.ack = reply(c, false, "mode");
    return;
  }
  g.setpoint = sp;
  fx.forwarded = sp;
  fx.ack = reply(c, true, "");
}

}  // namespace

ArbitrationResult arbitrate(const GatewayState& g, const Message& m, double t, const Pose& dr_pose) {
  ArbitrationResult r{g, {}};
  GatewayState& s = r.state;
  const std::string& src = m.header.source;

  if (std::holds_alternative<Heartbeat>(m.body)) {
    s.last_heartbeat[src] = t;
  } else if (const auto* c = std::get_if<Command>(&m.body)) {
    handle_command(s, *c, src, t, dr_pose, r.effects);
    if (r.effects.ack && !r.effects.ack->accepted) {
      r.effects.events.push_back({"ack", "command " + std::to_string(c->id) + " rejected: " +
                                             r.effects.ack->reason});
    }
  } else if (const auto* tu = std::get_if<TransformUpdate>(&m.body)) {
    s.transform = tu->transform;
    s.transform.rotation = normalized(s.transform.rotation);
    r.effects.events.push_back({"transform", "updated"});
  } else {
    r.effects.events.push_back({"ignored", std::string(type_name(m)) + " from " + src});
  }
  return r;
}

ArbitrationResult check_watchdog(const GatewayState& g, double t, const Pose& dr_pose) {
  ArbitrationResult r{g, {}};
  GatewayState& s = r.state;
  if (s.mode != GatewayMode::kAutonomous) return r;
  double last = s.autonomy_since;
  if (const auto it = s.last_heartbeat.find(kBackseatSource); it != s.last_heartbeat.end()) {
    last = std::max(last, it->second);
  }
  if (t - last > s.watchdog_timeout) {
    set_mode(s, GatewayMode::kPosition, t, dr_pose, r.effects, "watchdog");
    r.effects.events.push_back({"watchdog", "backseat heartbeat lost"});
  }
  return r;
}

}  // namespace auv
