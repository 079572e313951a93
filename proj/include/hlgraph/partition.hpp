#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "hlgraph/graph.hpp"

namespace hlgraph {

// Node-to-cluster assignment with contiguous cluster ids 0..count-1.
class Partition {
 public:
  Partition() = default;
  // Relabels arbitrary ids to 0..k-1 in order of first appearance by node index.
  explicit Partition(const std::vector<std::size_t>& raw_assignment);

  std::size_t n_nodes() const { return assignment_.size(); }
  std::size_t cluster_count() const { return sizes_.size(); }
  std::size_t cluster_of(std::size_t node) const { return assignment_[node]; }
  const std::vector<std::size_t>& assignment() const { return assignment_; }
  const std::vector<std::size_t>& cluster_sizes() const { return sizes_; }
  std::vector<std::size_t> members(std::size_t cluster) const;

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  std::vector<std::size_t> assignment_;
  std::vector<std::size_t> sizes_;
};

// Newman modularity (resolution 1) of an assignment on an unweighted graph.
// Zero for an edgeless graph.
double modularity(const Graph& graph, const std::vector<std::size_t>& assignment);

// Two-phase Louvain. Node visit order is shuffled by the seed; equal gains
// go to the lowest community id. When `modularity_trace` is given it receives
// the modularity after every completed level, starting with the singleton one.
Partition louvain(const Graph& graph, std::uint64_t seed,
                  std::vector<double>* modularity_trace = nullptr);

enum class SearchStrategy { kI, kII, kIII };

std::optional<SearchStrategy> parse_strategy(std::string_view name);
std::string_view to_string(SearchStrategy strategy);

enum class ComponentKind { kSupernode, kSuperlink, kWholeGraph };

std::string_view to_string(ComponentKind kind);

struct SuperComponent {
  ComponentKind kind = ComponentKind::kWholeGraph;
  std::size_t first_cluster = 0;   // supernode cluster, or the lower superlink cluster
  std::size_t second_cluster = 0;  // upper superlink cluster
  std::vector<std::size_t> slots;  // flat edge-slot indices, ascending
  std::size_t node_count = 0;      // nodes touched by the component's slots
};

// Strategy I: supernodes, superlinks, whole graph. II: superlinks, supernodes,
// whole graph. III: whole graph only. Within a kind, components are sorted by
// slot count; empty components are dropped.
std::vector<SuperComponent> enumerate_components(const Partition& partition,
                                                 SearchStrategy strategy);

struct SearchSpaceReport {
  boost::multiprecision::cpp_int s_node;
  boost::multiprecision::cpp_int s_link;
  boost::multiprecision::cpp_int s_graph;
  double log2_beta = 0.0;
  // beta itself, when it fits in a double.
  std::optional<double> beta;
};

// Exact sizes of the supernode, superlink, and whole-graph search spaces and
// the reduction ratio beta = S_graph / (S_node + S_link).
SearchSpaceReport search_space_report(const Partition& partition);

double log2_big(const boost::multiprecision::cpp_int& value);

}  // namespace hlgraph
