#include "auv/frame_alignment.hpp"

#include <cmath>
#include <stdexcept>

namespace auv {

Transform raw_alignment(const Pose& dr, const Pose& backseat) {
  return compose(Transform::from_pose(backseat), inverse(Transform::from_pose(dr)));
}

FrameAlignment align_frames(const StampedPose& dr_pose, const StampedPose& backseat_pose,
                            const FrameAlignment& fa, double t) {
  if (!(fa.smoothing > 0.0 && fa.smoothing <= 1.0)) {
    throw std::invalid_argument("smoothing factor must lie in (0, 1]");
  }
  FrameAlignment out = fa;
  if (std::abs(dr_pose.timestamp - backseat_pose.timestamp) > fa.pairing_window) {
    out.stale = true;
    return out;
  }
  const Transform target = raw_alignment(dr_pose.pose, backseat_pose.pose);
  if (fa.smoothing == 1.0) {
    out.transform = target;
  } else {
    out.transform.rotation = normalized(fa.transform.rotation.slerp(fa.smoothing, target.rotation));
    out.transform.translation =
        fa.transform.translation + fa.smoothing * (target.translation - fa.transform.translation);
  }
  out.last_update = t;
  out.stale = false;
  out.has_update = true;
  return out;
}

}  // namespace auv
