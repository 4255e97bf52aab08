#include <exception>

#include <omp.h>

#include "legged/graph/solver.hpp"

namespace legged {
namespace {

struct FactorBlock {
  Eigen::VectorXd residual;               // whitened
  std::vector<Eigen::MatrixXd> jacobians;  // whitened, one per key
};

FactorBlock evaluate_block(const Factor& factor, const GraphValues& values, JacobianMode mode) {
  std::vector<const NavState*> refs;
  refs.reserve(factor.nodes().size());
  for (NodeId id : factor.nodes()) refs.push_back(&values.at(id));

  const Eigen::MatrixXd& w = factor.sqrt_information();
  FactorBlock out;
  out.residual = w * factor.evaluate(refs);
  out.jacobians = factor_jacobians(factor, refs, mode);
  for (auto& j : out.jacobians) j = w * j;
  return out;
}

LinearSystem assemble(const FactorGraph& graph, const GraphValues& values,
                      const std::vector<FactorBlock>& blocks) {
  const auto& factors = graph.factors();
  Eigen::Index rows = 0;
  std::size_t nnz = 0;
  for (std::size_t f = 0; f < factors.size(); ++f) {
    rows += factors[f]->dim();
    for (const auto& j : blocks[f].jacobians) nnz += static_cast<std::size_t>(j.size());
  }
  const auto cols = static_cast<Eigen::Index>(values.tangent_dim());

  LinearSystem sys;
  sys.residual.resize(rows);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(nnz);

  Eigen::Index row = 0;
  for (std::size_t f = 0; f < factors.size(); ++f) {
    const Factor& factor = *factors[f];
    const FactorBlock& block = blocks[f];
    sys.residual.segment(row, factor.dim()) = block.residual;
    for (std::size_t k = 0; k < factor.keys().size(); ++k) {
      const VarKey& key = factor.keys()[k];
      const auto col = static_cast<Eigen::Index>(
          values.column(factor.nodes()[key.slot], key.block, key.foot));
      const Eigen::MatrixXd& j = block.jacobians[k];
      for (Eigen::Index c = 0; c < j.cols(); ++c) {
        for (Eigen::Index r = 0; r < j.rows(); ++r) {
          if (j(r, c) != 0.0) triplets.emplace_back(row + r, col + c, j(r, c));
        }
      }
    }
    row += factor.dim();
  }

  sys.jacobian.resize(rows, cols);
  sys.jacobian.setFromTriplets(triplets.begin(), triplets.end());
  sys.hessian = (sys.jacobian.transpose() * sys.jacobian).pruned();
  sys.gradient = sys.jacobian.transpose() * sys.residual;
  sys.cost = sys.residual.squaredNorm();
  return sys;
}

}  // namespace

LinearSystem linearize_serial(const FactorGraph& graph, const GraphValues& values,
                              JacobianMode mode) {
  graph.validate(values);
  std::vector<FactorBlock> blocks;
  blocks.reserve(graph.size());
  for (const auto& f : graph.factors()) blocks.push_back(evaluate_block(*f, values, mode));
  return assemble(graph, values, blocks);
}

LinearSystem linearize_parallel(const FactorGraph& graph, const GraphValues& values,
                                JacobianMode mode) {
  graph.validate(values);
  values.tangent_dim();  // offsets are cached lazily; fill before threads read them
  const auto& factors = graph.factors();
  const auto n = static_cast<std::ptrdiff_t>(factors.size());
  std::vector<FactorBlock> blocks(factors.size());
  std::exception_ptr failure;

#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t f = 0; f < n; ++f) {
    try {
      blocks[static_cast<std::size_t>(f)] =
          evaluate_block(*factors[static_cast<std::size_t>(f)], values, mode);
    } catch (...) {
#pragma omp critical(legged_linearize_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return assemble(graph, values, blocks);
}

LinearSystem linearize(const FactorGraph& graph, const GraphValues& values, JacobianMode mode,
                       Execution exec) {
  return exec == Execution::Parallel ? linearize_parallel(graph, values, mode)
                                     : linearize_serial(graph, values, mode);
}

}  // namespace legged
