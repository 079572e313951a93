#include "hlgraph/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <unordered_map>

#include <boost/multiprecision/cpp_dec_float.hpp>

namespace hlgraph {

namespace mp = boost::multiprecision;

Partition::Partition(const std::vector<std::size_t>& raw_assignment) {
  std::unordered_map<std::size_t, std::size_t> relabel;
  assignment_.reserve(raw_assignment.size());
  for (std::size_t raw : raw_assignment) {
    auto [it, inserted] = relabel.try_emplace(raw, relabel.size());
    if (inserted) sizes_.push_back(0);
    assignment_.push_back(it->second);
    ++sizes_[it->second];
  }
}

std::vector<std::size_t> Partition::members(std::size_t cluster) const {
  std::vector<std::size_t> out;
  for (std::size_t v = 0; v < assignment_.size(); ++v) {
    if (assignment_[v] == cluster) out.push_back(v);
  }
  return out;
}

double modularity(const Graph& graph, const std::vector<std::size_t>& assignment) {
  const double m = static_cast<double>(graph.n_edges());
  if (m == 0.0) return 0.0;
  const auto deg = graph.degrees();
  std::map<std::size_t, double> internal;  // sum of A_ij over ordered pairs inside c
  std::map<std::size_t, double> total;     // sum of degrees in c
  for (std::size_t v = 0; v < deg.size(); ++v) total[assignment[v]] += static_cast<double>(deg[v]);
  for (const auto& e : graph.edges()) {
    if (assignment[e.u] == assignment[e.v]) internal[assignment[e.u]] += 2.0;
  }
  double q = 0.0;
  for (const auto& [c, tot] : total) {
    const double in = internal.count(c) != 0 ? internal[c] : 0.0;
    q += in / (2.0 * m) - (tot / (2.0 * m)) * (tot / (2.0 * m));
  }
  return q;
}

namespace {

// Weighted graph of one Louvain level. self_loop[i] is A_ii, i.e. twice the
// edge weight folded into node i.
struct LevelGraph {
  std::vector<std::vector<std::pair<std::size_t, double>>> neighbors;
  std::vector<double> self_loop;
  std::vector<double> degree;
  double two_m = 0.0;

  std::size_t size() const { return neighbors.size(); }
};

LevelGraph level_from_graph(const Graph& graph) {
  LevelGraph level;
  const std::size_t n = graph.n_nodes();
  level.neighbors.resize(n);
  level.self_loop.assign(n, 0.0);
  level.degree.assign(n, 0.0);
  for (const auto& e : graph.edges()) {
    level.neighbors[e.u].emplace_back(e.v, 1.0);
    level.neighbors[e.v].emplace_back(e.u, 1.0);
    level.degree[e.u] += 1.0;
    level.degree[e.v] += 1.0;
  }
  level.two_m = std::accumulate(level.degree.begin(), level.degree.end(), 0.0);
  return level;
}

double level_modularity(const LevelGraph& level, const std::vector<std::size_t>& community) {
  const std::size_t n = level.size();
  std::vector<double> internal(n, 0.0);
  std::vector<double> total(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    total[community[i]] += level.degree[i];
    internal[community[i]] += level.self_loop[i];
    for (const auto& [j, w] : level.neighbors[i]) {
      if (community[j] == community[i]) internal[community[i]] += w;
    }
  }
  double q = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    if (total[c] == 0.0) continue;
    const double frac = total[c] / level.two_m;
    q += internal[c] / level.two_m - frac * frac;
  }
  return q;
}

constexpr double kGainTolerance = 1e-12;
constexpr double kMinImprovement = 1e-7;

// Local moving phase. Returns true when at least one node changed community.
bool move_nodes(const LevelGraph& level, std::vector<std::size_t>& community, std::mt19937_64& rng) {
  const std::size_t n = level.size();
  std::vector<double> total(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) total[community[i]] += level.degree[i];

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<double> link_weight(n, 0.0);
  std::vector<std::size_t> touched;
  bool any_move = false;
  double q = level_modularity(level, community);

  while (true) {
    bool moved_this_pass = false;
    for (std::size_t i : order) {
      const std::size_t own = community[i];
      const double k_i = level.degree[i];

      touched.clear();
      for (const auto& [j, w] : level.neighbors[i]) {
        const std::size_t c = community[j];
        if (link_weight[c] == 0.0) touched.push_back(c);
        link_weight[c] += w;
      }

      total[own] -= k_i;
      const double scale = k_i / level.two_m;
      const double stay_gain = link_weight[own] - total[own] * scale;
      std::size_t best = own;
      double best_gain = stay_gain;
      std::sort(touched.begin(), touched.end());
      for (std::size_t c : touched) {
        if (c == own) continue;
        const double gain = link_weight[c] - total[c] * scale;
        // Strictly better than the incumbent; equal gains keep the lower id
        // because candidates are visited in ascending order.
        if (gain > best_gain + kGainTolerance) {
          best = c;
          best_gain = gain;
        }
      }
      total[best] += k_i;
      if (best != own) {
        community[i] = best;
        moved_this_pass = true;
        any_move = true;
      }
      for (std::size_t c : touched) link_weight[c] = 0.0;
    }
    if (!moved_this_pass) break;
    const double next_q = level_modularity(level, community);
    const bool small_gain = next_q - q < kMinImprovement;
    q = next_q;
    if (small_gain) break;
  }
  return any_move;
}

// Renumbers communities to 0..k-1 by first appearance; returns k.
std::size_t compact(std::vector<std::size_t>& community) {
  std::unordered_map<std::size_t, std::size_t> relabel;
  for (auto& c : community) {
    auto [it, inserted] = relabel.try_emplace(c, relabel.size());
    c = it->second;
  }
  return relabel.size();
}

LevelGraph contract(const LevelGraph& level, const std::vector<std::size_t>& community,
                    std::size_t count) {
  LevelGraph next;
  next.neighbors.resize(count);
  next.self_loop.assign(count, 0.0);
  next.degree.assign(count, 0.0);
  next.two_m = level.two_m;
  std::vector<std::map<std::size_t, double>> weights(count);
  for (std::size_t i = 0; i < level.size(); ++i) {
    const std::size_t ci = community[i];
    next.degree[ci] += level.degree[i];
    next.self_loop[ci] += level.self_loop[i];
    for (const auto& [j, w] : level.neighbors[i]) {
      const std::size_t cj = community[j];
      if (cj == ci) {
        next.self_loop[ci] += w;
      } else {
        weights[ci][cj] += w;
      }
    }
  }
  for (std::size_t c = 0; c < count; ++c) {
    next.neighbors[c].assign(weights[c].begin(), weights[c].end());
  }
  return next;
}

}  // namespace

Partition louvain(const Graph& graph, std::uint64_t seed, std::vector<double>* modularity_trace) {
  const std::size_t n = graph.n_nodes();
  std::vector<std::size_t> node_community(n);
  std::iota(node_community.begin(), node_community.end(), 0);
  if (modularity_trace) modularity_trace->clear();

  LevelGraph level = level_from_graph(graph);
  if (level.two_m == 0.0) {
    if (modularity_trace) modularity_trace->push_back(0.0);
    return Partition(node_community);
  }

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> community(level.size());
  std::iota(community.begin(), community.end(), 0);
  double q = level_modularity(level, community);
  if (modularity_trace) modularity_trace->push_back(q);

  while (true) {
    std::iota(community.begin(), community.end(), 0);
    if (!move_nodes(level, community, rng)) break;
    const std::size_t count = compact(community);
    for (auto& c : node_community) c = community[c];
    const double next_q = level_modularity(level, community);
    if (modularity_trace) modularity_trace->push_back(next_q);
    level = contract(level, community, count);
    community.assign(level.size(), 0);
    if (next_q - q < kMinImprovement) break;
    q = next_q;
  }
  return Partition(node_community);
}

std::optional<SearchStrategy> parse_strategy(std::string_view name) {
  if (name == "I" || name == "1") return SearchStrategy::kI;
  if (name == "II" || name == "2") return SearchStrategy::kII;
  if (name == "III" || name == "3") return SearchStrategy::kIII;
  return std::nullopt;
}

std::string_view to_string(SearchStrategy strategy) {
  switch (strategy) {
    case SearchStrategy::kI:
      return "I";
    case SearchStrategy::kII:
      return "II";
    case SearchStrategy::kIII:
      return "III";
  }
  return "I";
}

std::string_view to_string(ComponentKind kind) {
  switch (kind) {
    case ComponentKind::kSupernode:
      return "supernode";
    case ComponentKind::kSuperlink:
      return "superlink";
    case ComponentKind::kWholeGraph:
      return "whole_graph";
  }
  return "whole_graph";
}

namespace {

void sort_by_size(std::vector<SuperComponent>& components) {
  std::stable_sort(components.begin(), components.end(),
                   [](const SuperComponent& a, const SuperComponent& b) {
                     return a.slots.size() < b.slots.size();
                   });
}

}  // namespace

std::vector<SuperComponent> enumerate_components(const Partition& partition,
                                                 SearchStrategy strategy) {
  const std::size_t n = partition.n_nodes();
  const std::size_t k = partition.cluster_count();
  const EdgeIndexMap index(n);

  std::vector<SuperComponent> supernodes(k);
  for (std::size_t c = 0; c < k; ++c) {
    supernodes[c].kind = ComponentKind::kSupernode;
    supernodes[c].first_cluster = c;
    supernodes[c].second_cluster = c;
    supernodes[c].node_count = partition.cluster_sizes()[c];
  }
  // Superlinks indexed by (lower, upper) cluster in row-major pair order.
  std::vector<SuperComponent> superlinks;
  std::vector<std::size_t> link_offset(k + 1, 0);
  for (std::size_t a = 0; a < k; ++a) {
    link_offset[a + 1] = link_offset[a] + (k - a - 1);
    for (std::size_t b = a + 1; b < k; ++b) {
      SuperComponent link;
      link.kind = ComponentKind::kSuperlink;
      link.first_cluster = a;
      link.second_cluster = b;
      link.node_count = partition.cluster_sizes()[a] + partition.cluster_sizes()[b];
      superlinks.push_back(std::move(link));
    }
  }

  SuperComponent whole;
  whole.kind = ComponentKind::kWholeGraph;
  whole.node_count = n;
  whole.slots.resize(index.size());
  std::iota(whole.slots.begin(), whole.slots.end(), 0);

  std::size_t slot = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j, ++slot) {
      std::size_t a = partition.cluster_of(i);
      std::size_t b = partition.cluster_of(j);
      if (a == b) {
        supernodes[a].slots.push_back(slot);
      } else {
        if (a > b) std::swap(a, b);
        superlinks[link_offset[a] + (b - a - 1)].slots.push_back(slot);
      }
    }
  }

  auto drop_empty = [](std::vector<SuperComponent>& v) {
    v.erase(std::remove_if(v.begin(), v.end(), [](const SuperComponent& c) { return c.slots.empty(); }),
            v.end());
  };
  drop_empty(supernodes);
  drop_empty(superlinks);
  sort_by_size(supernodes);
  sort_by_size(superlinks);

  std::vector<SuperComponent> out;
  auto append = [&out](std::vector<SuperComponent>& v) {
    for (auto& c : v) out.push_back(std::move(c));
  };
  switch (strategy) {
    case SearchStrategy::kI:
      append(supernodes);
      append(superlinks);
      break;
    case SearchStrategy::kII:
      append(superlinks);
      append(supernodes);
      break;
    case SearchStrategy::kIII:
      break;
  }
  if (!whole.slots.empty()) out.push_back(std::move(whole));
  return out;
}

double log2_big(const mp::cpp_int& value) {
  if (value <= 0) return -std::numeric_limits<double>::infinity();
  const std::size_t msb = mp::msb(value);
  if (msb < 53) return std::log2(value.convert_to<double>());
  const std::size_t shift = msb - 52;
  const mp::cpp_int top = value >> shift;
  return std::log2(top.convert_to<double>()) + static_cast<double>(shift);
}

SearchSpaceReport search_space_report(const Partition& partition) {
  auto pow2 = [](std::size_t exponent) { return mp::cpp_int(1) << exponent; };
  const auto& d = partition.cluster_sizes();
  const std::size_t n = partition.n_nodes();

  SearchSpaceReport report;
  report.s_graph = pow2(slot_count(n));
  for (std::size_t i = 0; i < d.size(); ++i) {
    report.s_node += pow2(slot_count(d[i]));
    // Half the ordered double sum equals the sum over unordered pairs.
    for (std::size_t j = i + 1; j < d.size(); ++j) report.s_link += pow2(d[i] * d[j]);
  }
  const mp::cpp_int denominator = report.s_node + report.s_link;
  report.log2_beta = log2_big(report.s_graph) - log2_big(denominator);
  if (report.log2_beta < 1000.0) {
    const mp::cpp_dec_float_50 ratio =
        mp::cpp_dec_float_50(report.s_graph) / mp::cpp_dec_float_50(denominator);
    report.beta = ratio.convert_to<double>();
  }
  return report;
}

}  // namespace hlgraph
