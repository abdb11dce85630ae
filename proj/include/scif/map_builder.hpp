#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "scif/geometry.hpp"
#include "scif/tag_map.hpp"

namespace scif {

struct TagObservation {
  std::int64_t epoch = 0;
  int tag_id = 0;
  Pose2 relative_pose;             // tag in robot frame at `epoch`
  Mat3 info = Mat3::Identity();    // information of the residual
};

/// Mapping run: fixed robot anchors plus per-frame relative tag observations.
struct MappingSession {
  std::string session_id;
  std::map<std::int64_t, Pose2> robot_poses;  // epoch -> anchor
  std::vector<TagObservation> observations;
  std::vector<int> expected_tags;  // optional; unobserved ones are reported
};

/// Unary factor pulling one node towards a global pose.
struct PriorFactor {
  std::size_t node = 0;
  Pose2 measured;
  Mat3 info = Mat3::Identity();
};

struct PoseGraph {
  std::vector<int> node_ids;        // tag id per node
  std::vector<Pose2> initial;       // initial node values
  std::vector<PriorFactor> factors;
  std::vector<int> skipped_tags;    // expected tags without observations
};

/// One node per observed tag, initialized from its first observation composed
/// with the anchor; one prior factor per observation. Throws
/// Error(kEmptyInput) when there are no observations and
/// Error(kInvalidArgument) when an observation has no anchor or a non-PSD
/// information matrix.
PoseGraph build_graph(const MappingSession& session);

struct OptimizeResult {
  TagMap map;
  std::vector<Pose2> values;
  std::vector<double> cost_history;  // cost after every accepted iteration
  int iterations = 0;
  bool converged = false;
  double final_cost = 0.0;
};

/// Residual: (dx, dy, wrapped dtheta) between node and measurement.
Vec3 factor_residual(const PriorFactor& f, const std::vector<Pose2>& values);
double graph_cost(const PoseGraph& graph, const std::vector<Pose2>& values);

/// Gauss-Newton with Levenberg damping on rejected steps. Stops when the
/// cost change drops below tol or after max_iters (converged = false).
OptimizeResult optimize(const PoseGraph& graph, int max_iters = 50, double tol = 1e-12);

}  // namespace scif
