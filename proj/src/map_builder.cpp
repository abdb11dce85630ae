#include "scif/map_builder.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

#include "scif/error.hpp"

namespace scif {

PoseGraph build_graph(const MappingSession& session) {
  if (session.observations.empty()) {
    throw Error(ErrorCode::kEmptyInput, "mapping session has no observations");
  }
  PoseGraph graph;
  std::map<int, std::size_t> node_of;
  for (const TagObservation& obs : session.observations) {
    const auto anchor = session.robot_poses.find(obs.epoch);
    if (anchor == session.robot_poses.end()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "observation of tag " + std::to_string(obs.tag_id) + " at epoch " +
                      std::to_string(obs.epoch) + " has no anchor pose");
    }
    if (!is_psd(obs.info)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "observation of tag " + std::to_string(obs.tag_id) +
                      " has a non-PSD information matrix");
    }
    const Pose2 global = compose(anchor->second, obs.relative_pose);
    auto [it, inserted] = node_of.try_emplace(obs.tag_id, graph.node_ids.size());
    if (inserted) {
      graph.node_ids.push_back(obs.tag_id);
      graph.initial.push_back(global);
    }
    graph.factors.push_back({it->second, global, obs.info});
  }
  for (int id : session.expected_tags) {
    if (node_of.count(id) == 0) graph.skipped_tags.push_back(id);
  }
  return graph;
}

Vec3 factor_residual(const PriorFactor& f, const std::vector<Pose2>& values) {
  return pose_difference(values[f.node], f.measured);
}

double graph_cost(const PoseGraph& graph, const std::vector<Pose2>& values) {
  double cost = 0.0;
  for (const PriorFactor& f : graph.factors) {
    const Vec3 r = factor_residual(f, values);
    cost += r.dot(f.info * r);
  }
  return cost;
}

namespace {

struct NormalEquations {
  Eigen::SparseMatrix<double> hessian;
  Eigen::VectorXd gradient;
};

// Every factor is unary with identity Jacobian, but assembly is generic over
// 3x3 blocks so other factor types slot into the same solve.
NormalEquations linearize(const PoseGraph& graph, const std::vector<Pose2>& values) {
  const auto n = static_cast<Eigen::Index>(3 * values.size());
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(graph.factors.size() * 9);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
  for (const PriorFactor& f : graph.factors) {
    const Vec3 r = factor_residual(f, values);
    const auto base = static_cast<Eigen::Index>(3 * f.node);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) triplets.emplace_back(base + i, base + j, f.info(i, j));
    }
    g.segment<3>(base) += f.info * r;
  }
  NormalEquations ne;
  ne.hessian.resize(n, n);
  ne.hessian.setFromTriplets(triplets.begin(), triplets.end());
  ne.gradient = std::move(g);
  return ne;
}

std::vector<Pose2> retract(const std::vector<Pose2>& values, const Eigen::VectorXd& delta) {
  std::vector<Pose2> out;
  out.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    out.emplace_back(Vec3(values[i].vector() + delta.segment<3>(3 * static_cast<Eigen::Index>(i))));
  }
  return out;
}

}  // namespace

OptimizeResult optimize(const PoseGraph& graph, int max_iters, double tol) {
  OptimizeResult res;
  std::vector<Pose2> values = graph.initial;
  double cost = graph_cost(graph, values);
  double lambda = 0.0;

  for (int iter = 0; iter < max_iters; ++iter) {
    res.iterations = iter + 1;
    const NormalEquations ne = linearize(graph, values);

    bool accepted = false;
    double new_cost = cost;
    std::vector<Pose2> candidate;
    for (int attempt = 0; attempt < 10 && !accepted; ++attempt) {
      Eigen::SparseMatrix<double> a = ne.hessian;
      for (Eigen::Index k = 0; k < a.rows(); ++k) {
        a.coeffRef(k, k) += lambda * std::max(a.coeff(k, k), 1e-12) + 1e-12;
      }
      Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(a);
      if (solver.info() != Eigen::Success) {
        lambda = lambda == 0.0 ? 1e-4 : lambda * 10.0;
        continue;
      }
      const Eigen::VectorXd delta = solver.solve(-ne.gradient);
      candidate = retract(values, delta);
      new_cost = graph_cost(graph, candidate);
      if (new_cost <= cost) {
        accepted = true;
        lambda *= 0.1;
      } else {
        lambda = lambda == 0.0 ? 1e-4 : lambda * 10.0;
      }
    }
    if (!accepted) break;

    const double change = cost - new_cost;
    values = std::move(candidate);
    cost = new_cost;
    res.cost_history.push_back(cost);
    if (change < tol) {
      res.converged = true;
      break;
    }
  }

  res.values = values;
  res.final_cost = cost;
  res.map.source.iterations = res.iterations;
  res.map.source.converged = res.converged;
  res.map.source.final_cost = cost;
  res.map.source.observation_count = static_cast<std::int64_t>(graph.factors.size());
  double sq = 0.0;
  for (const PriorFactor& f : graph.factors) sq += factor_residual(f, values).squaredNorm();
  res.map.source.rms_residual =
      graph.factors.empty() ? 0.0 : std::sqrt(sq / static_cast<double>(graph.factors.size()));
  for (std::size_t i = 0; i < values.size(); ++i) {
    res.map.entries[graph.node_ids[i]] = values[i];
  }
  return res;
}

}  // namespace scif
