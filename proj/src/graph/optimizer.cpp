#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SparseCholesky>

#include "legged/error.hpp"
#include "legged/graph/solver.hpp"

namespace legged {

OptimizeResult optimize(const FactorGraph& graph, const GraphValues& initial,
                        const LmConfig& config) {
  if (!graph.is_anchored()) {
    throw Error(ErrorCode::NotAnchored, "graph has no prior factor");
  }
  graph.validate(initial);

  OptimizeResult result;
  result.values = initial;
  double cost = graph.cost(initial);
  result.initial_cost = cost;
  double lambda = config.lambda_initial;
  result.termination = "max iterations";

  const auto n = static_cast<Eigen::Index>(initial.tangent_dim());
  Eigen::SparseMatrix<double> identity(n, n);
  identity.setIdentity();
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;

  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    const LinearSystem sys = linearize(graph, result.values, config.jacobian_mode, config.execution);
    if (sys.gradient.lpNorm<Eigen::Infinity>() < config.gradient_tolerance) {
      result.termination = "gradient tolerance";
      break;
    }

    IterationStats stats;
    stats.iteration = iter;
    bool accepted = false;
    bool solved_once = false;
    // The pattern can change between linearizations (exact zeros are pruned).
    bool pattern_ready = false;
    while (lambda <= config.lambda_max) {
      const Eigen::SparseMatrix<double> damped = sys.hessian + lambda * identity;
      if (!pattern_ready) {
        solver.analyzePattern(damped);
        pattern_ready = true;
      }
      solver.factorize(damped);
      if (solver.info() != Eigen::Success) {
        lambda *= config.lambda_up;
        ++stats.rejected_steps;
        continue;
      }
      const Eigen::VectorXd step = solver.solve(-sys.gradient);
      if (solver.info() != Eigen::Success || !step.allFinite()) {
        lambda *= config.lambda_up;
        ++stats.rejected_steps;
        continue;
      }
      solved_once = true;
      GraphValues candidate = result.values.retract(step);
      double new_cost;
      try {
        new_cost = graph.cost(candidate);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::AngleAtPi) throw;
        new_cost = std::numeric_limits<double>::infinity();
      }
      if (new_cost < cost) {
        const double rel = (cost - new_cost) / std::max(cost, 1e-300);
        result.values = std::move(candidate);
        cost = new_cost;
        stats.cost = cost;
        stats.lambda = lambda;
        lambda = std::max(lambda / config.lambda_down, 1e-12);
        accepted = true;
        if (rel < config.relative_cost_tolerance) result.termination = "relative cost tolerance";
        break;
      }
      lambda *= config.lambda_up;
      ++stats.rejected_steps;
    }

    if (!accepted) {
      if (!solved_once) {
        throw Error(ErrorCode::LinearSolveFailure, "normal equations could not be factorized");
      }
      result.termination = "no further decrease";
      break;
    }
    result.history.push_back(stats);
    result.iterations = iter;
    if (result.termination == "relative cost tolerance") break;
  }
  result.final_cost = cost;
  return result;
}

}  // namespace legged
