#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "legged/graph/factors.hpp"
#include "legged/graph/values.hpp"

namespace legged {

class FactorGraph {
 public:
  void add(FactorPtr factor) { factors_.push_back(std::move(factor)); }

  template <typename F, typename... Args>
  void emplace(Args&&... args) {
    factors_.push_back(std::make_shared<const F>(std::forward<Args>(args)...));
  }

  const std::vector<FactorPtr>& factors() const { return factors_; }
  std::size_t size() const { return factors_.size(); }
  bool is_anchored() const;
  std::size_t count(FactorKind kind) const;

  /// Sum over factors of ||r||^2 weighted by the inverse covariance.
  double cost(const GraphValues& values) const;
  /// Throws IndexOutOfRange when a factor references a missing node.
  void validate(const GraphValues& values) const;

 private:
  std::vector<FactorPtr> factors_;
};

/// Whitened Gauss-Newton system in tangent coordinates.
struct LinearSystem {
  Eigen::SparseMatrix<double> jacobian;  // rows: stacked residuals, cols: tangent dims
  Eigen::VectorXd residual;              // whitened
  Eigen::SparseMatrix<double> hessian;   // J^T J
  Eigen::VectorXd gradient;              // J^T r
  double cost = 0.0;                     // ||r||^2
};

enum class Execution { Serial, Parallel };

/// Reference implementation: factors evaluated one after another.
LinearSystem linearize_serial(const FactorGraph& graph, const GraphValues& values,
                              JacobianMode mode);
/// Factor blocks evaluated with OpenMP; assembly order matches the serial path.
LinearSystem linearize_parallel(const FactorGraph& graph, const GraphValues& values,
                                JacobianMode mode);

LinearSystem linearize(const FactorGraph& graph, const GraphValues& values, JacobianMode mode,
                       Execution exec = Execution::Parallel);

struct LmConfig {
  double lambda_initial = 1e-4;
  double lambda_up = 10.0;
  double lambda_down = 10.0;
  double lambda_max = 1e12;
  double relative_cost_tolerance = 1e-9;
  double gradient_tolerance = 1e-10;
  int max_iterations = 100;
  JacobianMode jacobian_mode = JacobianMode::Analytic;
  Execution execution = Execution::Parallel;
};

struct IterationStats {
  int iteration = 0;
  double cost = 0.0;       // cost after the iteration
  double lambda = 0.0;     // damping used for the accepted step
  int rejected_steps = 0;  // retries before acceptance
};

struct OptimizeResult {
  GraphValues values;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  int iterations = 0;
  std::vector<IterationStats> history;
  std::string termination;
};

/// Levenberg-Marquardt on the sparse normal equations with damping lambda * I.
/// Throws NotAnchored without a prior, LinearSolveFailure if no damping level
/// yields a factorization.
OptimizeResult optimize(const FactorGraph& graph, const GraphValues& initial,
                        const LmConfig& config = {});

}  // namespace legged
