#include <algorithm>

#include "legged/error.hpp"
#include "legged/graph/solver.hpp"

namespace legged {

bool FactorGraph::is_anchored() const { return count(FactorKind::Prior) > 0; }

std::size_t FactorGraph::count(FactorKind kind) const {
  return static_cast<std::size_t>(std::count_if(
      factors_.begin(), factors_.end(), [kind](const FactorPtr& f) { return f->kind() == kind; }));
}

double FactorGraph::cost(const GraphValues& values) const {
  double total = 0.0;
  for (const auto& f : factors_) total += f->cost(values);
  return total;
}

void FactorGraph::validate(const GraphValues& values) const {
  for (const auto& f : factors_) {
    for (NodeId id : f->nodes()) {
      if (id >= values.size()) {
        throw Error(ErrorCode::IndexOutOfRange,
                    std::string(to_string(f->kind())) + " factor references node " + std::to_string(id));
      }
    }
    for (const VarKey& key : f->keys()) {
      if (key.block == VarBlock::Contact) values.at(f->nodes()[key.slot]).contact(key.foot);
    }
  }
}

}  // namespace legged
