#include "hlgraph/baseline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "hlgraph/errors.hpp"

namespace hlgraph {

AttackResult random_attack(HardLabelOracle& oracle, const Graph& graph, const AttackGoal& goal,
                           double budget, std::uint64_t query_budget, std::uint64_t seed) {
  if (!(budget > 0.0 && budget <= 1.0)) throw InvalidParams("budget must lie in (0, 1]");
  const auto started = std::chrono::steady_clock::now();

  AttackResult result;
  result.adversarial_graph = graph;
  const std::size_t slots = graph.n_slots();
  const auto max_flips =
      static_cast<std::size_t>(std::floor(budget * static_cast<double>(slots) + 1e-9));

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::size_t> order(slots);
  std::iota(order.begin(), order.end(), 0);
  std::optional<Graph> best;

  if (max_flips == 0) {
    result.failure_reason = "budget allows no flip on this graph";
  } else {
    try {
      for (std::uint64_t q = 0; q < query_budget; ++q) {
        // (0, b]: 1 - U lies in (0, 1]
        const double ratio = budget * (1.0 - unit(rng));
        const auto wanted = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(slots)));
        const std::size_t n = std::clamp<std::size_t>(wanted, 1, max_flips);
        Graph candidate = graph;
        for (std::size_t i = 0; i < n; ++i) {
          std::uniform_int_distribution<std::size_t> pick(i, slots - 1);
          std::swap(order[i], order[pick(rng)]);
          candidate.flip_slot(order[i]);
        }
        const Label label = oracle.classify(candidate, QueryPhase::kOther);
        if (goal.reached(label) && (!best || n < flip_count(graph, *best))) best = std::move(candidate);
      }
    } catch (const BudgetExhausted&) {
      result.budget_exhausted = true;
    }
  }

  if (best) {
    result.success = true;
    result.adversarial_graph = *best;
    result.flips = flip_ledger(graph, *best);
    result.rate = perturbation_rate(graph, *best);
  } else if (result.failure_reason.empty()) {
    result.failure_reason = "no adversarial graph within the query budget";
  }
  result.queries = oracle.ledger().snapshot();
  result.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

}  // namespace hlgraph
