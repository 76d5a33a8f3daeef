#include "auv/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>

namespace auv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Node {
  Vec3 position;
  int parent = -1;
  double cost = 0.0;
  std::vector<int> children;
};

class Tree {
 public:
  explicit Tree(const Vec3& root) { nodes_.push_back({root, -1, 0.0, {}}); }

  int add(const Vec3& p, int parent, double cost) {
    nodes_.push_back({p, parent, cost, {}});
    const int id = static_cast<int>(nodes_.size()) - 1;
    nodes_[static_cast<std::size_t>(parent)].children.push_back(id);
    return id;
  }

  int nearest(const Vec3& p) const {
    int best = 0;
    double best_d = kInf;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      const double d = (nodes_[i].position - p).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(i);
      }
    }
    return best;
  }

  std::vector<int> within(const Vec3& p, double radius) const {
    std::vector<int> out;
    const double r2 = radius * radius;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if ((nodes_[i].position - p).squaredNorm() <= r2) out.push_back(static_cast<int>(i));
    }
    return out;
  }

  void reparent(int id, int new_parent, double new_cost) {
    Node& n = node(id);
    auto& siblings = node(n.parent).children;
    std::erase(siblings, id);
    n.parent = new_parent;
    node(new_parent).children.push_back(id);
    const double delta = new_cost - n.cost;
    // Propagate the cost change to the whole subtree.
    std::vector<int> stack{id};
    while (!stack.empty()) {
      const int cur = stack.back();
      stack.pop_back();
      node(cur).cost += delta;
      for (int c : node(cur).children) stack.push_back(c);
    }
  }

  Node& node(int id) { return nodes_[static_cast<std::size_t>(id)]; }
  const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
  std::size_t size() const { return nodes_.size(); }

 private:
  std::vector<Node> nodes_;
};

Vec3 uniform_in_box(const Aabb& box, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vec3 p;
  for (int i = 0; i < 3; ++i) p(i) = box.min(i) + u(rng) * (box.max(i) - box.min(i));
  return p;
}

Vec3 uniform_in_unit_ball(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vec3 dir;
  do {
    dir = Vec3(n(rng), n(rng), n(rng));
  } while (dir.squaredNorm() < 1e-24);
  return dir.normalized() * std::cbrt(u(rng));
}

struct Spheroid {
  Vec3 start;
  Vec3 goal;
  Vec3 centre;
  Mat3 shape;  // rotation * diag(radii)
  Aabb box;    // axis-aligned bounding box

  Spheroid(const Vec3& s, const Vec3& g, double c_best) : start(s), goal(g), centre(0.5 * (s + g)) {
    const double c_min = (g - s).norm();
    const double transverse = 0.5 * c_best;
    const double conjugate = 0.5 * std::sqrt(std::max(0.0, c_best * c_best - c_min * c_min));
    Mat3 rot = Mat3::Identity();
    if (c_min > 0.0) rot = Quat::FromTwoVectors(Vec3::UnitX(), (g - s) / c_min).toRotationMatrix();
    shape = rot * Vec3(transverse, conjugate, conjugate).asDiagonal();
    const Vec3 half = shape.rowwise().norm();
    box = {centre - half, centre + half};
  }

  bool contains(const Vec3& x, double c_best) const {
    return (x - start).norm() + (x - goal).norm() <= c_best;
  }
};

Aabb intersect(const Aabb& a, const Aabb& b) { return {a.min.cwiseMax(b.min), a.max.cwiseMin(b.max)}; }

std::optional<Vec3> informed_sample(const Spheroid& ell, double c_best, const World& world,
                                    InformedSampler kind, std::mt19937_64& rng) {
  constexpr int kAttempts = 1000;
  const Aabb region = intersect(ell.box, world.bounds);
  if ((region.max.array() < region.min.array()).any()) return std::nullopt;
  for (int i = 0; i < kAttempts; ++i) {
    Vec3 x;
    if (kind == InformedSampler::kDirect) {
      x = ell.shape * uniform_in_unit_ball(rng) + ell.centre;
      if (!world.bounds.contains(x)) continue;
    } else {
      x = uniform_in_box(region, rng);
    }
    if (ell.contains(x, c_best)) return x;
  }
  return std::nullopt;
}

}  // namespace

const char* to_string(PlanOutcome o) {
  switch (o) {
    case PlanOutcome::kFound: return "found";
    case PlanOutcome::kNoPath: return "no path found";
    case PlanOutcome::kInvalidEndpoint: return "invalid endpoint";
  }
  return "unknown";
}

Path Path::from_points(std::vector<Vec3> pts) {
  Path p;
  for (const auto& x : pts) {
    if (p.points.empty() || p.points.back() != x) p.points.push_back(x);
  }
  p.cost = p.recomputed_cost();
  return p;
}

double Path::recomputed_cost() const {
  double c = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) c += (points[i] - points[i - 1]).norm();
  return c;
}

double rrt_star_gamma(double free_volume) {
  constexpr double d = 3.0;
  const double unit_ball = 4.0 / 3.0 * std::numbers::pi;
  return 2.0 * std::pow(1.0 + 1.0 / d, 1.0 / d) * std::pow(free_volume / unit_ball, 1.0 / d);
}

PlanResult plan(const Vec3& start, const Vec3& goal, const World& world, const PlannerParams& params) {
  PlanResult res;
  if (!world.bounds.contains(start) || !world.bounds.contains(goal) || !point_free(start, world) ||
      !point_free(goal, world) || params.max_iterations <= 0 || !(params.step_size > 0.0)) {
    res.outcome = PlanOutcome::kInvalidEndpoint;
    return res;
  }
  if ((goal - start).norm() <= params.goal_tolerance && collision_free(start, goal, world)) {
    res.outcome = PlanOutcome::kFound;
    res.path = Path::from_points({start, goal});
    res.node_count = 1;
    return res;
  }

  std::mt19937_64 rng(params.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double gamma = params.gamma_scale * rrt_star_gamma(world.bounds.volume());

  Tree tree(start);
  std::vector<int> goal_candidates;
  int best_leaf = -1;
  double best_cost = kInf;
  res.best_cost_history.reserve(static_cast<std::size_t>(params.max_iterations));

  auto refresh_best = [&] {
    for (int id : goal_candidates) {
      const double c = tree.node(id).cost + (tree.node(id).position - goal).norm();
      if (c < best_cost) {
        best_cost = c;
        best_leaf = id;
      }
    }
  };

  for (int it = 0; it < params.max_iterations; ++it) {
    std::optional<Vec3> sample;
    if (best_leaf < 0) {
      sample = unit(rng) < params.goal_bias ? goal : uniform_in_box(world.bounds, rng);
    } else {
      const Spheroid ell(start, goal, best_cost);
      sample = informed_sample(ell, best_cost, world, params.sampler, rng);
      if (sample && params.record_samples) res.informed_samples.push_back({*sample, best_cost});
    }
    if (sample) {
      const int near_id = tree.nearest(*sample);
      const Vec3 from = tree.node(near_id).position;
      const Vec3 delta = *sample - from;
      const double dist = delta.norm();
      if (dist > 0.0) {
        const Vec3 x_new = dist <= params.step_size ? *sample : Vec3(from + delta * (params.step_size / dist));
        if (collision_free(from, x_new, world)) {
          const double n = static_cast<double>(tree.size() + 1);
          const double radius = std::min(gamma * std::cbrt(std::log(n) / n), params.step_size);
          std::vector<int> near = tree.within(x_new, radius);

          int parent = near_id;
          double cost = tree.node(near_id).cost + (x_new - from).norm();
          for (int id : near) {
            if (id == near_id) continue;
            const double c = tree.node(id).cost + (x_new - tree.node(id).position).norm();
            if (c < cost && collision_free(tree.node(id).position, x_new, world)) {
              parent = id;
              cost = c;
            }
          }
          const int new_id = tree.add(x_new, parent, cost);

          for (int id : near) {
            if (id == parent) continue;
            const double c = cost + (tree.node(id).position - x_new).norm();
            if (c < tree.node(id).cost && collision_free(x_new, tree.node(id).position, world)) {
              tree.reparent(id, new_id, c);
            }
          }

          if ((x_new - goal).norm() <= params.goal_tolerance && collision_free(x_new, goal, world)) {
            goal_candidates.push_back(new_id);
            if (res.first_solution_iteration < 0) res.first_solution_iteration = it;
          }
        }
      }
    }
    refresh_best();
    res.best_cost_history.push_back(best_cost);
  }

  res.node_count = tree.size();
  if (params.record_tree) {
    for (std::size_t i = 1; i < tree.size(); ++i) {
      const Node& n = tree.node(static_cast<int>(i));
      res.tree.push_back({tree.node(n.parent).position, n.position});
    }
  }
  if (best_leaf < 0) {
    res.outcome = PlanOutcome::kNoPath;
    return res;
  }
  std::vector<Vec3> pts{goal};
  for (int id = best_leaf; id >= 0; id = tree.node(id).parent) pts.push_back(tree.node(id).position);
  std::reverse(pts.begin(), pts.end());
  res.path = Path::from_points(std::move(pts));
  res.outcome = PlanOutcome::kFound;
  return res;
}

void write_tree_jsonl(std::ostream& os, const PlanResult& result) {
  for (const auto& e : result.tree) {
    os << "{\"parent\":[" << e.parent.x() << ',' << e.parent.y() << ',' << e.parent.z()
       << "],\"child\":[" << e.child.x() << ',' << e.child.y() << ',' << e.child.z() << "]}\n";
  }
}

}  // namespace auv
