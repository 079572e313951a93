#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "hlgraph/graph.hpp"

namespace hlgraph {

struct DatasetStats {
  std::size_t graph_count = 0;
  double avg_nodes = 0.0;
  double avg_edges = 0.0;
};

struct DatasetBundle {
  std::string name;
  std::vector<Graph> graphs;
  std::size_t class_count = 0;

  DatasetStats stats() const;
};

// Reads the public TUDataset text layout from `dir`:
//   NAME_A.txt               "i, j" per line, 1-based global node ids
//   NAME_graph_indicator.txt graph id (1-based) of each node
//   NAME_graph_labels.txt    one label per graph
//   NAME_node_labels.txt     optional, one integer per node (one-hot encoded)
// Reciprocal and duplicate edge lines collapse into one undirected edge.
// Graph labels are remapped to 0..C-1 in sorted order.
DatasetBundle load_tudataset(const std::filesystem::path& dir, const std::string& name);

// Writes a bundle in the same layout. Node features, when present, must be
// one-hot rows; they are written back as node labels.
void write_tudataset(const DatasetBundle& bundle, const std::filesystem::path& dir);

struct SyntheticSpec {
  enum class Kind { kErdosRenyi, kBarbell, kSbm };

  Kind kind = Kind::kErdosRenyi;
  std::size_t n_nodes = 20;               // Erdos-Renyi
  double edge_probability = 0.2;          // Erdos-Renyi
  std::size_t clique_size = 4;            // barbell
  std::vector<std::size_t> block_sizes;   // SBM
  double p_in = 0.5;                      // SBM
  double p_out = 0.05;                    // SBM
  std::size_t count = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

// Parses "er:N:P:COUNT:SEED", "barbell:K:COUNT:SEED", or
// "sbm:S1,S2,...:P_IN:P_OUT:COUNT:SEED". Throws InvalidParams.
SyntheticSpec parse_synthetic_spec(std::string_view text);

// Deterministic given the seed; graph i uses its own stream derived from
// (seed, i). When a labeler is given every graph gets its label.
DatasetBundle generate_synthetic(const SyntheticSpec& spec,
                                 const std::function<Label(const Graph&)>& labeler = {});

Graph erdos_renyi(std::size_t n_nodes, double p, std::uint64_t seed);
Graph barbell(std::size_t clique_size);
Graph stochastic_block_model(const std::vector<std::size_t>& sizes, double p_in, double p_out,
                             std::uint64_t seed);

}  // namespace hlgraph
