#include "hlgraph/cgs.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace hlgraph {

namespace {

std::mt19937_64 trial_rng(std::uint64_t seed, std::size_t component, std::size_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(component), static_cast<std::uint32_t>(trial)};
  return std::mt19937_64(seq);
}

// Draws n = max(1, round(s * m)) distinct slots of the component, s ~ U[0, 1].
std::vector<std::size_t> draw_flips(const std::vector<std::size_t>& slots, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> fraction(0.0, 1.0);
  const std::size_t m = slots.size();
  const auto rounded = static_cast<std::size_t>(std::llround(fraction(rng) * static_cast<double>(m)));
  const std::size_t n = std::max<std::size_t>(1, std::min(rounded, m));
  std::vector<std::size_t> pool = slots;
  for (std::size_t i = 0; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, m - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(n);
  return pool;
}

}  // namespace

CgsOutcome coarse_grained_search(HardLabelOracle& oracle, const Graph& graph, const AttackGoal& goal,
                                 const Partition& partition, const CgsOptions& options) {
  if (partition.n_nodes() != graph.n_nodes()) {
    throw DimensionMismatch("partition and graph disagree on the node count");
  }
  const auto components = enumerate_components(partition, options.strategy);

  CgsOutcome best;
  best.theta0 = PerturbationVector(graph.n_slots());
  std::uint64_t trials = 0;

  auto finish = [&]() {
    best.queries_used = trials;
    if (best.success) {
      best.theta0 = PerturbationVector(graph.n_slots());
      for (std::size_t k : best.flipped_slots) best.theta0[k] = 1.0;
    }
    return best;
  };

  std::size_t c = 0;
  while (c < components.size()) {
    const ComponentKind phase = components[c].kind;
    for (; c < components.size() && components[c].kind == phase; ++c) {
      const auto& component = components[c];
      const std::size_t n_trials = options.trials_scale * component.node_count;
      for (std::size_t t = 0; t < n_trials; ++t) {
        auto rng = trial_rng(options.seed, c, t);
        auto flips = draw_flips(component.slots, rng);
        Graph candidate = graph;
        for (std::size_t k : flips) candidate.flip_slot(k);
        Label label = 0;
        try {
          label = oracle.classify(candidate, QueryPhase::kCgs);
        } catch (const BudgetExhausted& e) {
          throw SearchInterrupted(e, finish());
        }
        ++trials;
        if (goal.reached(label) && (!best.success || flips.size() < best.flips)) {
          std::sort(flips.begin(), flips.end());
          best.success = true;
          best.flips = flips.size();
          best.flipped_slots = std::move(flips);
          best.found_in = component.kind;
        }
      }
    }
    if (best.success) return finish();
  }
  throw NoAdversarialFound("coarse-grained search exhausted all components after " +
                           std::to_string(trials) + " queries");
}

}  // namespace hlgraph
