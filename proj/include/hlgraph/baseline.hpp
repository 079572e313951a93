#pragma once

#include <cstdint>

#include "hlgraph/attack.hpp"
#include "hlgraph/graph.hpp"
#include "hlgraph/oracle.hpp"

namespace hlgraph {

// Random-perturbation baseline. Each draw picks a ratio uniformly in (0, b],
// flips round(ratio * S) random slots (at least one, at most floor(b * S)) and
// spends one query on the result. Stops after `query_budget` queries and keeps
// the success with the fewest flips.
AttackResult random_attack(HardLabelOracle& oracle, const Graph& graph, const AttackGoal& goal,
                           double budget, std::uint64_t query_budget, std::uint64_t seed);

}  // namespace hlgraph
