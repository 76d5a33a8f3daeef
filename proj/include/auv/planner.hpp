#pragma once

// Informed RRT* over 3D position space.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "auv/world.hpp"

namespace auv {

struct Path {
  std::vector<Vec3> points;
  double cost = 0.0;

  static Path from_points(std::vector<Vec3> pts);
  double recomputed_cost() const;
};

enum class InformedSampler { kDirect, kRejection };

struct PlannerParams {
  int max_iterations = 2000;
  double step_size = 4.0;  // also caps the rewire radius
  double goal_bias = 0.05;
  double gamma_scale = 1.0;  // multiplies the minimal RRT* gamma
  double goal_tolerance = 0.25;
  std::uint64_t seed = 1;
  InformedSampler sampler = InformedSampler::kDirect;
  bool record_samples = false;
  bool record_tree = false;
};

enum class PlanOutcome { kFound, kNoPath, kInvalidEndpoint };

const char* to_string(PlanOutcome o);

struct InformedSample {
  Vec3 point;
  double best_cost = 0.0;  // c_best in force when the sample was accepted
};

struct TreeEdge {
  Vec3 parent;
  Vec3 child;
};

struct PlanResult {
  PlanOutcome outcome = PlanOutcome::kNoPath;
  Path path;
  std::vector<double> best_cost_history;  // per iteration; +inf before the first solution
  std::vector<InformedSample> informed_samples;
  std::vector<TreeEdge> tree;
  int first_solution_iteration = -1;
  std::size_t node_count = 0;

  bool found() const { return outcome == PlanOutcome::kFound; }
};

/// Minimal gamma for asymptotic optimality in 3D for the given free volume.
double rrt_star_gamma(double free_volume);

PlanResult plan(const Vec3& start, const Vec3& goal, const World& world, const PlannerParams& params);

/// One JSON object per tree edge.
void write_tree_jsonl(std::ostream& os, const PlanResult& result);

}  // namespace auv
