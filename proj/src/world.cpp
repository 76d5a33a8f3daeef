#include "auv/world.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace auv {

double point_segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

// Closest points between two segments (Ericson, Real-Time Collision Detection 5.1.9).
double segment_segment_distance(const Vec3& p0, const Vec3& p1, const Vec3& q0, const Vec3& q1) {
  constexpr double eps = 1e-15;
  const Vec3 d1 = p1 - p0;
  const Vec3 d2 = q1 - q0;
  const Vec3 r = p0 - q0;
  const double a = d1.squaredNorm();
  const double e = d2.squaredNorm();
  const double f = d2.dot(r);
  double s = 0.0;
  double t = 0.0;
  if (a <= eps && e <= eps) return r.norm();
  if (a <= eps) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (e <= eps) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2);
      const double denom = a * e - b * b;
      s = denom > eps ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  return ((p0 + s * d1) - (q0 + t * d2)).norm();
}

double point_box_distance(const Vec3& p, const Aabb& box) {
  const Vec3 clamped = p.cwiseMax(box.min).cwiseMin(box.max);
  return (p - clamped).norm();
}

bool segment_intersects_box(const Vec3& a, const Vec3& b, const Aabb& box) {
  double t0 = 0.0;
  double t1 = 1.0;
  const Vec3 d = b - a;
  for (int i = 0; i < 3; ++i) {
    if (d(i) == 0.0) {
      if (a(i) < box.min(i) || a(i) > box.max(i)) return false;
      continue;
    }
    double lo = (box.min(i) - a(i)) / d(i);
    double hi = (box.max(i) - a(i)) / d(i);
    if (lo > hi) std::swap(lo, hi);
    t0 = std::max(t0, lo);
    t1 = std::min(t1, hi);
    if (t0 > t1) return false;
  }
  return true;
}

double segment_box_distance(const Vec3& a, const Vec3& b, const Aabb& box) {
  if (segment_intersects_box(a, b, box)) return 0.0;
  // Disjoint convex sets: the minimum is attained at a segment endpoint or
  // between the segment and one of the twelve box edges.
  double best = std::min(point_box_distance(a, box), point_box_distance(b, box));
  const std::array<Vec3, 2> c{box.min, box.max};
  for (int axis = 0; axis < 3; ++axis) {
    const int u = (axis + 1) % 3;
    const int v = (axis + 2) % 3;
    for (int iu = 0; iu < 2; ++iu) {
      for (int iv = 0; iv < 2; ++iv) {
        Vec3 e0;
        e0(axis) = box.min(axis);
        e0(u) = c[static_cast<std::size_t>(iu)](u);
        e0(v) = c[static_cast<std::size_t>(iv)](v);
        Vec3 e1 = e0;
        e1(axis) = box.max(axis);
        best = std::min(best, segment_segment_distance(a, b, e0, e1));
      }
    }
  }
  return best;
}

double clearance(const Vec3& a, const Vec3& b, const World& world) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& ob : world.obstacles) {
    double d = 0.0;
    if (const auto* s = std::get_if<Sphere>(&ob)) {
      d = std::max(0.0, point_segment_distance(s->centre, a, b) - s->radius);
    } else {
      d = segment_box_distance(a, b, std::get<Aabb>(ob));
    }
    best = std::min(best, d);
  }
  return best;
}

bool point_free(const Vec3& p, const World& world) { return collision_free(p, p, world); }

bool collision_free(const Vec3& a, const Vec3& b, const World& world) {
  for (const auto& ob : world.obstacles) {
    if (const auto* s = std::get_if<Sphere>(&ob)) {
      if (point_segment_distance(s->centre, a, b) <= s->radius + world.inflation) return false;
    } else if (segment_box_distance(a, b, std::get<Aabb>(ob)) <= world.inflation) {
      return false;
    }
  }
  return true;
}

}  // namespace auv
