#pragma once

#include <cstdint>
#include <vector>

#include "hlgraph/errors.hpp"
#include "hlgraph/graph.hpp"
#include "hlgraph/oracle.hpp"
#include "hlgraph/partition.hpp"

namespace hlgraph {

struct CgsOptions {
  SearchStrategy strategy = SearchStrategy::kI;
  // Each component gets trials_scale * (nodes touched by the component) trials.
  std::size_t trials_scale = 5;
  std::uint64_t seed = 0;
};

// Result of the coarse-grained initial search. theta0 is 1.0 on the flipped
// slots and 0 elsewhere.
struct CgsOutcome {
  bool success = false;
  PerturbationVector theta0;
  std::vector<std::size_t> flipped_slots;
  ComponentKind found_in = ComponentKind::kWholeGraph;
  std::size_t flips = 0;
  std::uint64_t queries_used = 0;
};

// Budget ran out during the search; carries the best candidate found so far.
class SearchInterrupted : public BudgetExhausted {
 public:
  SearchInterrupted(const BudgetExhausted& cause, CgsOutcome partial)
      : BudgetExhausted(cause), partial_(std::move(partial)) {}

  const CgsOutcome& partial() const { return partial_; }

 private:
  CgsOutcome partial_;
};

// Randomized search over supernodes, superlinks, and the whole graph (in the
// order given by the strategy) for a perturbation that reaches the goal.
// Every trial is one query. A phase (all components of one kind) always runs
// to completion; later phases are skipped once any phase succeeded. The
// minimal-flip success is returned.
//
// Throws NoAdversarialFound when every phase fails and SearchInterrupted when
// the oracle budget runs out.
CgsOutcome coarse_grained_search(HardLabelOracle& oracle, const Graph& graph, const AttackGoal& goal,
                                 const Partition& partition, const CgsOptions& options);

}  // namespace hlgraph
