#include "hlgraph/attack.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "hlgraph/errors.hpp"
#include "hlgraph/partition.hpp"

namespace hlgraph {

namespace {

constexpr double kFlipThreshold = 0.5;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double clip01(double x) { return std::clamp(x, 0.0, 1.0); }

double objective_on_unit(const PerturbationVector& unit, double g) {
  double p = 0.0;
  for (double v : unit.values()) p += clip01(g * v - kFlipThreshold);
  return p;
}

}  // namespace

double AttackConfig::learning_rate(std::size_t dim) const {
  const double d = static_cast<double>(std::max<std::size_t>(dim, 1));
  switch (schedule) {
    case LearningRateSchedule::kConstant:
      return learning_rate_scale / std::sqrt(d);
    case LearningRateSchedule::kInverseSqrtDT:
      return learning_rate_scale /
             std::sqrt(d * static_cast<double>(std::max<std::size_t>(iterations, 1)));
  }
  return learning_rate_scale / std::sqrt(d);
}

void AttackConfig::validate() const {
  if (!(budget > 0.0 && budget <= 1.0)) throw InvalidParams("budget must lie in (0, 1]");
  if (directions == 0) throw InvalidParams("Q must be at least 1");
  if (!(smoothing > 0.0)) throw InvalidParams("mu must be positive");
  if (!(tolerance > 0.0)) throw InvalidParams("binary-search tolerance must be positive");
  if (!(learning_rate_scale > 0.0)) throw InvalidParams("learning-rate scale must be positive");
  if (max_queries && *max_queries == 0) throw InvalidParams("max_queries must be positive");
}

BoundaryPoint boundary_distance(HardLabelOracle& oracle, const Graph& graph, const AttackGoal& goal,
                                const PerturbationVector& theta, double tolerance,
                                std::optional<double> hint) {
  if (!(tolerance > 0.0)) throw InvalidParams("tolerance must be positive");
  const PerturbationVector unit = normalize(theta);

  double largest = 0.0;
  double smallest = std::numeric_limits<double>::infinity();
  for (double v : unit.values()) {
    if (v > 0.0) {
      largest = std::max(largest, v);
      smallest = std::min(smallest, v);
    }
  }
  if (largest == 0.0) throw NoBoundary("direction has no positive component; nothing can flip");

  // Below `first_flip` the lattice point is the original graph; at or above
  // `saturation` every positive component has flipped.
  const double first_flip = kFlipThreshold / largest;
  const double saturation = (kFlipThreshold / smallest) * (1.0 + 1e-12);

  BoundaryPoint point;
  auto probe = [&](double lambda, Graph& out) {
    out = apply_perturbation(graph, unit.scaled(lambda), kFlipThreshold);
    ++point.probes;
    return goal.reached(oracle.classify(out, QueryPhase::kBinarySearch));
  };

  double lo = first_flip * (1.0 - 1e-12);
  double hi = saturation;
  if (hint && *hint > 0.0) hi = std::clamp(*hint, first_flip, saturation);

  Graph hi_graph;
  while (!probe(hi, hi_graph)) {
    if (hi >= saturation) {
      throw NoBoundary("goal not reached even with every positive component flipped");
    }
    lo = hi;
    hi = std::min(2.0 * hi, saturation);
  }

  Graph mid_graph;
  while (hi - lo >= tolerance) {
    const double mid = 0.5 * (lo + hi);
    if (probe(mid, mid_graph)) {
      hi = mid;
      std::swap(hi_graph, mid_graph);
    } else {
      lo = mid;
    }
  }
  point.distance = hi;
  point.graph = std::move(hi_graph);
  return point;
}

double objective_p(const PerturbationVector& theta, double g) {
  if (g < 0.0) throw InvalidParams("boundary distance must be non-negative");
  return objective_on_unit(normalize(theta), g);
}

std::size_t objective_count(const PerturbationVector& theta, double g) {
  const PerturbationVector unit = normalize(theta);
  return static_cast<std::size_t>(std::count_if(unit.values().begin(), unit.values().end(),
                                                [g](double v) { return g * v >= kFlipThreshold; }));
}

double solve_g_star(const PerturbationVector& theta_new, double p_old) {
  const PerturbationVector unit = normalize(theta_new);

  // Each positive component k contributes a ramp that starts at 0.5/theta_k
  // and saturates at 1.5/theta_k with slope theta_k.
  struct Event {
    double at;
    double slope_change;
  };
  std::vector<Event> events;
  for (double v : unit.values()) {
    if (v > 0.0) {
      events.push_back({kFlipThreshold / v, v});
      events.push_back({(kFlipThreshold + 1.0) / v, -v});
    }
  }
  const auto p_max = static_cast<double>(events.size() / 2);
  if (!(p_old > 0.0) || p_old >= p_max) {
    throw DegenerateTarget("p_old = " + std::to_string(p_old) + " outside (0, " +
                           std::to_string(p_max) + ")");
  }
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.at < b.at; });

  double g = 0.0;
  double p = 0.0;
  double slope = 0.0;
  for (const auto& e : events) {
    const double p_at_event = p + slope * (e.at - g);
    if (slope > 0.0 && p_at_event >= p_old) return g + (p_old - p) / slope;
    p = p_at_event;
    g = e.at;
    slope += e.slope_change;
  }
  // Unreachable for p_old < p_max barring rounding in the last segment.
  return g;
}

int qegc_sign(HardLabelOracle& oracle, const Graph& graph, const AttackGoal& goal, double p_old,
              const PerturbationVector& theta_new) {
  const double g_star = solve_g_star(theta_new, p_old);
  const Graph probe = apply_perturbation(graph, normalize(theta_new).scaled(g_star), kFlipThreshold);
  return goal.reached(oracle.classify(probe, QueryPhase::kQegc)) ? -1 : +1;
}

GradientEstimate estimate_gradient(HardLabelOracle& oracle, const Graph& graph,
                                   const AttackGoal& goal, const PerturbationVector& theta,
                                   double p_current, std::size_t directions, double smoothing,
                                   std::mt19937_64& rng, std::size_t max_resamples) {
  if (directions == 0) throw InvalidParams("Q must be at least 1");
  if (!(smoothing > 0.0)) throw InvalidParams("mu must be positive");
  const std::size_t d = theta.dim();
  std::normal_distribution<double> normal(0.0, 1.0);

  GradientEstimate estimate;
  estimate.gradient = PerturbationVector(d);
  PerturbationVector u(d);
  for (std::size_t q = 0; q < directions; ++q) {
    bool done = false;
    for (std::size_t attempt = 0; attempt <= max_resamples && !done; ++attempt) {
      if (attempt > 0) ++estimate.redraws;
      for (auto& v : u.values()) v = normal(rng);
      try {
        u = normalize(u);
        PerturbationVector theta_new = theta;
        theta_new.axpy(smoothing, u);
        const int s = qegc_sign(oracle, graph, goal, p_current, theta_new);
        for (std::size_t k = 0; k < d; ++k) {
          if (u[k] > 0.0) {
            estimate.gradient[k] += s;
          } else if (u[k] < 0.0) {
            estimate.gradient[k] -= s;
          }
        }
        done = true;
      } catch (const DegenerateTarget&) {
      } catch (const ZeroVector&) {
      }
    }
    if (done) {
      ++estimate.used;
    } else {
      ++estimate.skipped;
    }
  }
  for (auto& v : estimate.gradient.values()) v /= static_cast<double>(directions);
  return estimate;
}

AttackResult sign_sgd_attack(HardLabelOracle& oracle, const Graph& graph, const AttackGoal& goal,
                             const AttackConfig& config, const CgsOutcome& start) {
  config.validate();
  const auto started = Clock::now();
  AttackResult result;
  result.adversarial_graph = graph;
  result.initial_flips = start.flips;
  result.found_in = start.found_in;

  auto finish = [&](AttackResult& r) -> AttackResult {
    r.queries = oracle.ledger().snapshot();
    r.wall_time_s = seconds_since(started);
    return std::move(r);
  };

  if (!start.success || start.theta0.dim() != graph.n_slots()) {
    result.failure_reason = "no adversarial starting point";
    return finish(result);
  }

  // Best boundary point so far; the coarse-search point is the first one.
  Graph best = apply_perturbation(graph, start.theta0, kFlipThreshold);
  std::size_t best_flips = flip_count(graph, best);
  auto consider = [&](const Graph& candidate) {
    const std::size_t flips = flip_count(graph, candidate);
    if (flips <= best_flips) {
      best = candidate;
      best_flips = flips;
    }
  };

  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  const double eta = config.learning_rate(graph.n_slots());
  PerturbationVector theta = start.theta0;
  std::optional<double> hint;
  std::size_t flat_steps = 0;

  try {
    for (std::size_t t = 0; t < config.iterations; ++t) {
      BoundaryPoint boundary;
      try {
        boundary = boundary_distance(oracle, graph, goal, theta, config.tolerance, hint);
      } catch (const NoBoundary&) {
        if (t == 0) {
          result.failure_reason = "no decision boundary along the starting direction";
          return finish(result);
        }
        break;
      }
      hint = boundary.distance;
      const double p = objective_p(theta, boundary.distance);
      if (!result.p_trace.empty() && std::abs(p - result.p_trace.back()) < config.stagnation_tolerance) {
        ++flat_steps;
      } else {
        flat_steps = 0;
      }
      result.p_trace.push_back(p);
      consider(boundary.graph);

      const GradientEstimate estimate = estimate_gradient(oracle, graph, goal, theta, p, config.directions,
                                                          config.smoothing, rng, config.max_resamples);
      result.gradient_norm_trace.push_back(estimate.gradient.l2_norm());
      theta.axpy(-eta, estimate.gradient);
      result.iterations_run = t + 1;
      if (flat_steps >= config.stagnation_window) break;
    }
    if (config.iterations > 0 && theta.has_positive()) {
      try {
        consider(boundary_distance(oracle, graph, goal, theta, config.tolerance, hint).graph);
      } catch (const NoBoundary&) {
      }
    }
  } catch (const BudgetExhausted&) {
    result.budget_exhausted = true;
  }

  const double rate = perturbation_rate(graph, best);
  if (rate > config.budget) {
    result.failure_reason = "perturbation rate above budget";
    return finish(result);
  }
  try {
    if (!goal.reached(oracle.classify(best, QueryPhase::kOther))) {
      result.failure_reason = "final verification query did not reach the goal";
      return finish(result);
    }
  } catch (const BudgetExhausted&) {
    result.budget_exhausted = true;
    result.failure_reason = "query budget exhausted before verification";
    return finish(result);
  }
  result.success = true;
  result.flips = flip_ledger(graph, best);
  result.rate = rate;
  result.adversarial_graph = std::move(best);
  return finish(result);
}

AttackResult run_attack(HardLabelOracle& oracle, const Graph& graph, Label original_label,
                        const AttackConfig& config) {
  config.validate();
  const auto started = Clock::now();
  const AttackGoal goal{original_label, config.target};

  auto failed = [&](std::string reason, std::optional<ComponentKind> found_in = std::nullopt) {
    AttackResult r;
    r.adversarial_graph = graph;
    r.failure_reason = std::move(reason);
    r.found_in = found_in;
    r.queries = oracle.ledger().snapshot();
    r.wall_time_s = seconds_since(started);
    return r;
  };

  const Partition partition = louvain(graph, config.seed);
  CgsOutcome start;
  try {
    start = coarse_grained_search(oracle, graph, goal, partition,
                                  {config.strategy, config.trials_scale, config.seed});
  } catch (const NoAdversarialFound& e) {
    return failed(e.what());
  } catch (const BudgetExhausted& e) {
    AttackResult r = failed(e.what());
    r.budget_exhausted = true;
    return r;
  }

  AttackResult result = sign_sgd_attack(oracle, graph, goal, config, start);
  result.wall_time_s = seconds_since(started);
  return result;
}

}  // namespace hlgraph
