#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hlgraph/cgs.hpp"
#include "hlgraph/graph.hpp"
#include "hlgraph/oracle.hpp"

namespace hlgraph {

enum class LearningRateSchedule {
  kConstant,        // eta = scale / sqrt(d)
  kInverseSqrtDT,   // eta = scale / sqrt(d * T)
};

struct AttackConfig {
  double budget = 0.2;              // maximum perturbation rate b
  std::size_t iterations = 200;     // T
  std::size_t directions = 100;     // Q
  double smoothing = 0.1;           // mu
  LearningRateSchedule schedule = LearningRateSchedule::kConstant;
  double learning_rate_scale = 0.1;
  double tolerance = 1e-3;          // binary-search epsilon
  std::optional<std::uint64_t> max_queries;
  std::optional<Label> target;      // targeted mode when set
  std::uint64_t seed = 0;

  SearchStrategy strategy = SearchStrategy::kI;
  std::size_t trials_scale = 5;

  std::size_t max_resamples = 3;       // redraws of a degenerate QEGC direction
  std::size_t stagnation_window = 10;  // early stop after this many flat steps
  double stagnation_tolerance = 1e-6;

  double learning_rate(std::size_t dim) const;
  void validate() const;
};

struct BoundaryPoint {
  double distance = 0.0;  // g: smallest scale (within tolerance) reaching the goal
  Graph graph;            // h(A, g * theta_norm), already confirmed by a query
  std::size_t probes = 0;
};

// Bisects the scale lambda along theta/|theta| until the bracket is narrower
// than `tolerance` and returns the upper end. The upper end starts at `hint`
// (or at the scale where every positive component flips) and doubles until
// the goal is reached. Throws NoBoundary when even the fully saturated point
// misses the goal.
BoundaryPoint boundary_distance(HardLabelOracle& oracle, const Graph& graph, const AttackGoal& goal,
                                const PerturbationVector& theta, double tolerance,
                                std::optional<double> hint = std::nullopt);

// Clipped L1 surrogate: sum_k clip(g * theta_norm[k] - 0.5, 0, 1).
double objective_p(const PerturbationVector& theta, double g);

// Number of components of g * theta_norm at or above 0.5.
std::size_t objective_count(const PerturbationVector& theta, double g);

// Unique g with objective_p(theta, g) == p_old, found by inverting the
// piecewise-linear profile. Throws DegenerateTarget unless
// 0 < p_old < (number of positive components).
double solve_g_star(const PerturbationVector& theta_new, double p_old);

// One-query comparison of p(theta_new) against p_old: -1 when the point on
// theta_new with the same surrogate value already reaches the goal, +1 otherwise.
int qegc_sign(HardLabelOracle& oracle, const Graph& graph, const AttackGoal& goal, double p_old,
              const PerturbationVector& theta_new);

struct GradientEstimate {
  PerturbationVector gradient;
  std::size_t used = 0;       // directions that produced a sign
  std::size_t skipped = 0;    // directions dropped after exhausting redraws
  std::size_t redraws = 0;
};

// Averaged sign estimate (1/Q) sum_q s_q * sign(u_q) over Q normalized
// Gaussian directions, where s_q comes from qegc_sign at theta + mu * u_q.
GradientEstimate estimate_gradient(HardLabelOracle& oracle, const Graph& graph,
                                   const AttackGoal& goal, const PerturbationVector& theta,
                                   double p_current, std::size_t directions, double smoothing,
                                   std::mt19937_64& rng, std::size_t max_resamples = 3);

struct AttackResult {
  bool success = false;
  Graph adversarial_graph;  // the original graph on failure
  FlipLedger flips;
  double rate = 0.0;
  QueryCounts queries;      // snapshot of the oracle ledger at the end of the run
  double wall_time_s = 0.0;
  std::vector<double> gradient_norm_trace;
  std::vector<double> p_trace;
  std::optional<ComponentKind> found_in;
  std::size_t initial_flips = 0;  // flips of the coarse-search starting point
  std::size_t iterations_run = 0;
  bool budget_exhausted = false;
  std::string failure_reason;
};

// signSGD refinement from a coarse-search start. Each iteration runs one
// boundary search on the iterate and Q single-query sign estimates, then
// steps theta <- theta - eta * gradient. The returned graph is the boundary
// point with the fewest flips seen (ties go to the latest), re-verified with
// one final query; it is only reported when its rate is within the budget.
AttackResult sign_sgd_attack(HardLabelOracle& oracle, const Graph& graph, const AttackGoal& goal,
                             const AttackConfig& config, const CgsOutcome& start);

// Full pipeline on one target: Louvain partition, coarse-grained search,
// then signSGD. Failures of any stage come back as an unsuccessful result.
AttackResult run_attack(HardLabelOracle& oracle, const Graph& graph, Label original_label,
                        const AttackConfig& config);

}  // namespace hlgraph
