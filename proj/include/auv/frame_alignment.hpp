#pragma once

#include "auv/frames.hpp"

namespace auv {

struct StampedPose {
  Pose pose;
  double timestamp = 0.0;
};

/// Maps poses from the frontseat dead-reckoning frame into the backseat frame.
struct FrameAlignment {
  Transform transform;
  double last_update = 0.0;
  double smoothing = 1.0;       // in (0, 1]; 1 = use the raw transform
  double pairing_window = 0.05; // s
  bool stale = false;           // set when the last attempt was rejected
  bool has_update = false;
};

/// Transform that maps dr onto backseat exactly: backseat ∘ dr⁻¹.
Transform raw_alignment(const Pose& dr, const Pose& backseat);

/// Blends the stored transform toward the raw one (slerp rotation, lerp
/// translation). Poses further apart in time than the pairing window leave
/// the transform untouched and mark the result stale.
FrameAlignment align_frames(const StampedPose& dr_pose, const StampedPose& backseat_pose,
                            const FrameAlignment& fa, double t);

}  // namespace auv
