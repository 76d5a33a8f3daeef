#pragma once

// Waypoint pilot: mission sequencing, path interpolation and carrot setpoints.

#include <optional>
#include <string>
#include <vector>

#include "auv/control.hpp"
#include "auv/planner.hpp"

namespace auv {

struct Waypoint {
  Vec3 position = Vec3::Zero();
  std::optional<double> heading;  // rad, applied while holding
  double acceptance_radius = 0.5;
  double hold = 0.0;              // s
  bool planned = true;            // false: straight segment, no planner query
};

struct Mission {
  std::vector<Waypoint> waypoints;
};

enum class PilotPhase { kIdle, kPlanning, kTransit, kHold, kDone, kFault };

const char* to_string(PilotPhase p);
std::optional<PilotPhase> phase_from_string(const std::string& s);

/// Declared state-machine edges.
bool legal_transition(PilotPhase from, PilotPhase to);

struct PilotParams {
  double lookahead = 1.5;
  double replan_cross_track = 3.0;
  PlannerParams planner;
};

struct PilotState {
  PilotPhase phase = PilotPhase::kIdle;
  bool started = false;
  std::size_t waypoint_index = 0;
  std::optional<Path> path;  // present only in TRANSIT
  double phase_entry_time = 0.0;
  double progress = 0.0;     // arc length of the last projection
  double heading = 0.0;      // direction of travel carried into HOLD
  Pose anchor;               // hold pose for IDLE / FAULT / safety hold
  std::string fault_reason;
  int plans_issued = 0;
};

struct PathPoint {
  Vec3 point;
  bool clamped = false;
};

/// Piecewise-linear point at arc length s; out-of-range s is clamped and flagged.
PathPoint interpolate(const Path& path, double s);

struct Projection {
  double arc_length = 0.0;
  Vec3 point;
  double distance = 0.0;
};

/// Closest point on the path restricted to arc lengths >= min_arc_length.
Projection project(const Path& path, const Vec3& p, double min_arc_length = 0.0);

struct PilotTransition {
  PilotPhase from;
  PilotPhase to;
  std::size_t waypoint_index;
};

struct PilotOutput {
  PilotState state;
  ControlSetpoint setpoint;
  std::optional<PilotTransition> transition;
  std::optional<PlanResult> plan;  // set on ticks that queried the planner
  bool safety_hold = false;
};

PilotState start_mission(PilotState s, double t);

/// Advances at most one phase transition per call.
PilotOutput tick(const PilotState& pilot, const Pose& pose_est, const Mission& mission,
                 const World& world, const PilotParams& params, double t,
                 bool estimator_valid = true);

}  // namespace auv
