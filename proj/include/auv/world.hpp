#pragma once

// Obstacle geometry and exact segment collision tests.

#include <variant>
#include <vector>

#include "auv/frames.hpp"

namespace auv {

struct Aabb {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  bool contains(const Vec3& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
  double volume() const { return (max - min).prod(); }
};

struct Sphere {
  Vec3 centre = Vec3::Zero();
  double radius = 1.0;
};

using Obstacle = std::variant<Sphere, Aabb>;

struct World {
  Aabb bounds{Vec3::Constant(-50.0), Vec3::Constant(50.0)};
  std::vector<Obstacle> obstacles;
  double inflation = 0.0;  // vehicle radius proxy
};

double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b);
double segment_segment_distance(const Vec3& p0, const Vec3& p1, const Vec3& q0, const Vec3& q1);
double point_box_distance(const Vec3& p, const Aabb& box);
bool segment_intersects_box(const Vec3& a, const Vec3& b, const Aabb& box);
double segment_box_distance(const Vec3& a, const Vec3& b, const Aabb& box);

/// Distance between the segment and the closest obstacle surface (negative
/// values are not produced; 0 means touching or intersecting).
double clearance(const Vec3& a, const Vec3& b, const World& world);

bool point_free(const Vec3& p, const World& world);

/// True iff the segment inflated by world.inflation touches no obstacle.
bool collision_free(const Vec3& a, const Vec3& b, const World& world);

}  // namespace auv
