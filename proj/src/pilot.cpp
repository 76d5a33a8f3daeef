#include "auv/pilot.hpp"

#include <algorithm>
#include <cmath>

namespace auv {

const char* to_string(PilotPhase p) {
  switch (p) {
    case PilotPhase::kIdle: return "IDLE";
    case PilotPhase::kPlanning: return "PLANNING";
    case PilotPhase::kTransit: return "TRANSIT";
    case PilotPhase::kHold: return "HOLD";
    case PilotPhase::kDone: return "DONE";
    case PilotPhase::kFault: return "FAULT";
  }
  return "UNKNOWN";
}

std::optional<PilotPhase> phase_from_string(const std::string& s) {
  for (auto p : {PilotPhase::kIdle, PilotPhase::kPlanning, PilotPhase::kTransit, PilotPhase::kHold,
                 PilotPhase::kDone, PilotPhase::kFault}) {
    if (s == to_string(p)) return p;
  }
  return std::nullopt;
}

bool legal_transition(PilotPhase from, PilotPhase to) {
  using P = PilotPhase;
  switch (from) {
    case P::kIdle: return to == P::kPlanning || to == P::kDone;
    case P::kPlanning: return to == P::kTransit || to == P::kFault;
    case P::kTransit: return to == P::kHold || to == P::kPlanning;
    case P::kHold: return to == P::kPlanning || to == P::kDone;
    case P::kDone:
    case P::kFault: return false;
  }
  return false;
}

PathPoint interpolate(const Path& path, double s) {
  if (path.points.empty()) return {Vec3::Zero(), true};
  PathPoint out;
  if (s < 0.0 || !std::isfinite(s)) {
    out.clamped = true;
    s = std::isnan(s) ? 0.0 : std::max(s, 0.0);
  }
  if (s > path.cost) {
    out.clamped = true;
    s = path.cost;
  }
  double acc = 0.0;
  for (std::size_t i = 1; i < path.points.size(); ++i) {
    const Vec3 seg = path.points[i] - path.points[i - 1];
    const double len = seg.norm();
    if (s <= acc + len) {
      const double t = len > 0.0 ? (s - acc) / len : 0.0;
      out.point = path.points[i - 1] + std::clamp(t, 0.0, 1.0) * seg;
      return out;
    }
    acc += len;
  }
  out.point = path.points.back();
  return out;
}

Projection project(const Path& path, const Vec3& p, double min_arc_length) {
  Projection best;
  if (path.points.empty()) return best;
  best.arc_length = std::clamp(min_arc_length, 0.0, path.cost);
  best.point = interpolate(path, best.arc_length).point;
  best.distance = (p - best.point).norm();
  double acc = 0.0;
  for (std::size_t i = 1; i < path.points.size(); ++i) {
    const Vec3 a = path.points[i - 1];
    const Vec3 seg = path.points[i] - a;
    const double len = seg.norm();
    if (len > 0.0 && acc + len >= min_arc_length) {
      const double t_min = std::max(0.0, (min_arc_length - acc) / len);
      const double t = std::clamp((p - a).dot(seg) / (len * len), t_min, 1.0);
      const Vec3 q = a + t * seg;
      const double d = (p - q).norm();
      if (d < best.distance) {
        best = {acc + t * len, q, d};
      }
    }
    acc += len;
  }
  return best;
}

PilotState start_mission(PilotState s, double t) {
  s.started = true;
  s.phase_entry_time = t;
  return s;
}

namespace {

Pose hold_pose(const Vec3& p, double heading) { return {p, quat_from_euler(0.0, 0.0, heading)}; }

// Tangent heading of the segment containing arc length s.
std::optional<double> path_heading(const Path& path, double s) {
  double acc = 0.0;
  for (std::size_t i = 1; i < path.points.size(); ++i) {
    const Vec3 seg = path.points[i] - path.points[i - 1];
    const double len = seg.norm();
    if (s <= acc + len || i + 1 == path.points.size()) {
      if (std::hypot(seg.x(), seg.y()) < 1e-6) return std::nullopt;
      return std::atan2(seg.y(), seg.x());
    }
    acc += len;
  }
  return std::nullopt;
}

void enter(PilotOutput& out, PilotPhase next, double t) {
  out.transition = PilotTransition{out.state.phase, next, out.state.waypoint_index};
  out.state.phase = next;
  out.state.phase_entry_time = t;
  if (next != PilotPhase::kTransit) out.state.path.reset();
}

}  // namespace

PilotOutput tick(const PilotState& pilot, const Pose& pose_est, const Mission& mission,
                 const World& world, const PilotParams& params, double t, bool estimator_valid) {
  PilotOutput out;
  out.state = pilot;
  PilotState& s = out.state;
  const Vec3 here = pose_est.position;

  if (!estimator_valid && s.phase != PilotPhase::kDone && s.phase != PilotPhase::kFault) {
    out.safety_hold = true;
    out.setpoint = ControlSetpoint::position(s.anchor);
    return out;
  }
  if (s.phase != PilotPhase::kDone && s.phase != PilotPhase::kFault) {
    s.anchor = hold_pose(here, yaw_of(pose_est.orientation));
  }

  switch (s.phase) {
    case PilotPhase::kIdle: {
      out.setpoint = ControlSetpoint::position(s.anchor);
      if (s.started) {
        if (mission.waypoints.empty()) {
          enter(out, PilotPhase::kDone, t);
        } else {
          s.heading = yaw_of(pose_est.orientation);
          enter(out, PilotPhase::kPlanning, t);
        }
      }
      return out;
    }

    case PilotPhase::kPlanning: {
      const Waypoint& wp = mission.waypoints[s.waypoint_index];
      PlanResult result;
      if (wp.planned) {
        PlannerParams pp = params.planner;
        pp.seed = params.planner.seed + static_cast<std::uint64_t>(s.plans_issued);
        result = plan(here, wp.position, world, pp);
      } else {
        result.outcome = PlanOutcome::kFound;
        result.path = Path::from_points({here, wp.position});
      }
      ++s.plans_issued;
      out.setpoint = ControlSetpoint::position(hold_pose(here, s.heading));
      if (!result.found()) {
        s.fault_reason = std::string("planner: ") + to_string(result.outcome);
        s.anchor = hold_pose(here, s.heading);
        enter(out, PilotPhase::kFault, t);
      } else {
        const Path path = result.path;
        enter(out, PilotPhase::kTransit, t);
        s.path = path;
        s.progress = 0.0;
      }
      out.plan = std::move(result);
      return out;
    }

    case PilotPhase::kTransit: {
      const Waypoint& wp = mission.waypoints[s.waypoint_index];
      if ((here - wp.position).norm() <= wp.acceptance_radius) {
        enter(out, PilotPhase::kHold, t);
        out.setpoint = ControlSetpoint::position(hold_pose(wp.position, wp.heading.value_or(s.heading)));
        return out;
      }
      const Path& path = *s.path;
      const Projection proj = project(path, here, s.progress);
      if (proj.distance > params.replan_cross_track) {
        enter(out, PilotPhase::kPlanning, t);
        out.setpoint = ControlSetpoint::position(hold_pose(here, s.heading));
        return out;
      }
      s.progress = proj.arc_length;
      const double carrot_s = std::min(proj.arc_length + params.lookahead, path.cost);
      const Vec3 carrot = interpolate(path, carrot_s).point;
      if (const auto h = path_heading(path, carrot_s)) s.heading = *h;
      out.setpoint = ControlSetpoint::position(hold_pose(carrot, s.heading));
      return out;
    }

    case PilotPhase::kHold: {
      const Waypoint& wp = mission.waypoints[s.waypoint_index];
      const double heading = wp.heading.value_or(s.heading);
      out.setpoint = ControlSetpoint::position(hold_pose(wp.position, heading));
      if (t - s.phase_entry_time >= wp.hold) {
        if (s.waypoint_index + 1 >= mission.waypoints.size()) {
          s.anchor = hold_pose(wp.position, heading);
          enter(out, PilotPhase::kDone, t);
          s.waypoint_index = mission.waypoints.size();
        } else {
          s.heading = heading;
          enter(out, PilotPhase::kPlanning, t);
          ++s.waypoint_index;
        }
      }
      return out;
    }

    case PilotPhase::kDone:
    case PilotPhase::kFault:
      out.setpoint = ControlSetpoint::position(s.anchor);
      return out;
  }
  return out;
}

}  // namespace auv
