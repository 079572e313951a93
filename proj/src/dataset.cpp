#include "hlgraph/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "hlgraph/errors.hpp"

namespace hlgraph {

namespace fs = std::filesystem;

DatasetStats DatasetBundle::stats() const {
  DatasetStats s;
  s.graph_count = graphs.size();
  if (graphs.empty()) return s;
  double nodes = 0.0;
  double edges = 0.0;
  for (const auto& g : graphs) {
    nodes += static_cast<double>(g.n_nodes());
    edges += static_cast<double>(g.n_edges());
  }
  s.avg_nodes = nodes / static_cast<double>(graphs.size());
  s.avg_edges = edges / static_cast<double>(graphs.size());
  return s;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename Int>
Int parse_int(std::string_view token, const std::string& file, std::size_t line) {
  token = trim(token);
  Int value{};
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(token.data(), end, value);
  if (ec != std::errc{} || ptr != end || token.empty()) {
    throw ParseError(file, line, "expected an integer, got '" + std::string(token) + "'");
  }
  return value;
}

// Non-empty lines of a file with their 1-based line numbers.
std::vector<std::pair<std::size_t, std::string>> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  std::vector<std::pair<std::size_t, std::string>> lines;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!trim(line).empty()) lines.emplace_back(number, line);
  }
  return lines;
}

}  // namespace

DatasetBundle load_tudataset(const fs::path& dir, const std::string& name) {
  const fs::path edges_path = dir / (name + "_A.txt");
  const fs::path indicator_path = dir / (name + "_graph_indicator.txt");
  const fs::path labels_path = dir / (name + "_graph_labels.txt");
  const fs::path node_labels_path = dir / (name + "_node_labels.txt");

  // Graph labels first: they fix the number of graphs.
  std::vector<long long> raw_labels;
  for (const auto& [line, text] : read_lines(labels_path)) {
    raw_labels.push_back(parse_int<long long>(text, labels_path.string(), line));
  }
  const std::size_t n_graphs = raw_labels.size();

  // node (0-based global) -> graph (0-based), and local index within the graph
  std::vector<std::size_t> node_graph;
  std::vector<std::size_t> local_index;
  std::vector<std::size_t> graph_sizes(n_graphs, 0);
  for (const auto& [line, text] : read_lines(indicator_path)) {
    const auto gid = parse_int<long long>(text, indicator_path.string(), line);
    if (gid < 1 || static_cast<std::size_t>(gid) > n_graphs) {
      throw DanglingNode(indicator_path.string() + ":" + std::to_string(line) + ": graph id " +
                         std::to_string(gid) + " has no entry in " + labels_path.filename().string());
    }
    const auto g = static_cast<std::size_t>(gid - 1);
    node_graph.push_back(g);
    local_index.push_back(graph_sizes[g]++);
  }

  DatasetBundle bundle;
  bundle.name = name;
  bundle.graphs.reserve(n_graphs);
  for (std::size_t g = 0; g < n_graphs; ++g) bundle.graphs.emplace_back(graph_sizes[g]);

  for (const auto& [line, text] : read_lines(edges_path)) {
    const auto comma = text.find(',');
    if (comma == std::string::npos) {
      throw ParseError(edges_path.string(), line, "expected 'i, j'");
    }
    const auto i = parse_int<long long>(std::string_view(text).substr(0, comma), edges_path.string(), line);
    const auto j = parse_int<long long>(std::string_view(text).substr(comma + 1), edges_path.string(), line);
    const auto n_nodes = static_cast<long long>(node_graph.size());
    if (i < 1 || j < 1 || i > n_nodes || j > n_nodes) {
      throw ParseError(edges_path.string(), line, "node id out of range");
    }
    if (i == j) throw ParseError(edges_path.string(), line, "self-loop in a simple graph");
    const auto u = static_cast<std::size_t>(i - 1);
    const auto v = static_cast<std::size_t>(j - 1);
    if (node_graph[u] != node_graph[v]) {
      throw ParseError(edges_path.string(), line, "edge joins nodes of different graphs");
    }
    bundle.graphs[node_graph[u]].set_edge(local_index[u], local_index[v], true);
  }

  if (fs::exists(node_labels_path)) {
    std::vector<long long> node_labels;
    for (const auto& [line, text] : read_lines(node_labels_path)) {
      node_labels.push_back(parse_int<long long>(text, node_labels_path.string(), line));
    }
    if (node_labels.size() != node_graph.size()) {
      throw ParseError(node_labels_path.string(), node_labels.size(),
                       "node label count differs from the graph indicator");
    }
    const std::set<long long> distinct(node_labels.begin(), node_labels.end());
    std::map<long long, Eigen::Index> column;
    for (long long value : distinct) column.emplace(value, static_cast<Eigen::Index>(column.size()));
    std::vector<Eigen::MatrixXd> features;
    for (std::size_t g = 0; g < n_graphs; ++g) {
      features.push_back(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(graph_sizes[g]),
                                               static_cast<Eigen::Index>(distinct.size())));
    }
    for (std::size_t v = 0; v < node_labels.size(); ++v) {
      features[node_graph[v]](static_cast<Eigen::Index>(local_index[v]), column[node_labels[v]]) = 1.0;
    }
    for (std::size_t g = 0; g < n_graphs; ++g) bundle.graphs[g].set_features(std::move(features[g]));
  }

  const std::set<long long> classes(raw_labels.begin(), raw_labels.end());
  std::map<long long, Label> remap;
  for (long long value : classes) remap.emplace(value, static_cast<Label>(remap.size()));
  for (std::size_t g = 0; g < n_graphs; ++g) bundle.graphs[g].set_label(remap[raw_labels[g]]);
  bundle.class_count = classes.size();
  return bundle;
}

void write_tudataset(const DatasetBundle& bundle, const fs::path& dir) {
  fs::create_directories(dir);
  const std::string& name = bundle.name;
  std::ofstream edges(dir / (name + "_A.txt"));
  std::ofstream indicator(dir / (name + "_graph_indicator.txt"));
  std::ofstream labels(dir / (name + "_graph_labels.txt"));
  if (!edges || !indicator || !labels) throw ConfigError("cannot write dataset into " + dir.string());

  const bool with_features =
      !bundle.graphs.empty() && std::all_of(bundle.graphs.begin(), bundle.graphs.end(),
                                            [](const Graph& g) { return g.features().has_value(); });
  std::ofstream node_labels;
  if (with_features) node_labels.open(dir / (name + "_node_labels.txt"));

  std::size_t offset = 0;
  for (std::size_t g = 0; g < bundle.graphs.size(); ++g) {
    const Graph& graph = bundle.graphs[g];
    for (const auto& e : graph.edges()) {
      edges << offset + e.u + 1 << ", " << offset + e.v + 1 << '\n';
      edges << offset + e.v + 1 << ", " << offset + e.u + 1 << '\n';
    }
    for (std::size_t v = 0; v < graph.n_nodes(); ++v) {
      indicator << g + 1 << '\n';
      if (with_features) {
        const auto row = graph.features()->row(static_cast<Eigen::Index>(v));
        Eigen::Index hot = 0;
        row.maxCoeff(&hot);
        if (row(hot) != 1.0 || row.sum() != 1.0) {
          throw InvalidParams("node features must be one-hot to be written as node labels");
        }
        node_labels << hot << '\n';
      }
    }
    labels << graph.label().value_or(0) << '\n';
    offset += graph.n_nodes();
  }
}

void SyntheticSpec::validate() const {
  if (count == 0) throw InvalidParams("synthetic count must be positive");
  switch (kind) {
    case Kind::kErdosRenyi:
      if (n_nodes == 0) throw InvalidParams("Erdos-Renyi graphs need at least one node");
      if (!(edge_probability >= 0.0 && edge_probability <= 1.0)) {
        throw InvalidParams("edge probability must lie in [0, 1]");
      }
      break;
    case Kind::kBarbell:
      if (clique_size < 2) throw InvalidParams("barbell cliques need at least two nodes");
      break;
    case Kind::kSbm:
      if (block_sizes.empty()) throw InvalidParams("SBM needs at least one block");
      if (std::find(block_sizes.begin(), block_sizes.end(), 0) != block_sizes.end()) {
        throw InvalidParams("SBM blocks must be non-empty");
      }
      if (!(p_in >= 0.0 && p_in <= 1.0 && p_out >= 0.0 && p_out <= 1.0)) {
        throw InvalidParams("SBM probabilities must lie in [0, 1]");
      }
      break;
  }
}

namespace {

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> parts;
  std::string current;
  for (char c : text) {
    if (c == sep) {
      parts.push_back(current);
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  parts.push_back(current);
  return parts;
}

double to_double(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw InvalidParams("bad number '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw InvalidParams("bad number '" + s + "'");
  }
}

std::uint64_t to_unsigned(const std::string& s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw InvalidParams("bad integer '" + s + "'");
  }
  return v;
}

std::mt19937_64 graph_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

SyntheticSpec parse_synthetic_spec(std::string_view text) {
  const auto parts = split(text, ':');
  SyntheticSpec spec;
  const std::string& kind = parts.front();
  if (kind == "er" && parts.size() == 5) {
    spec.kind = SyntheticSpec::Kind::kErdosRenyi;
    spec.n_nodes = to_unsigned(parts[1]);
    spec.edge_probability = to_double(parts[2]);
    spec.count = to_unsigned(parts[3]);
    spec.seed = to_unsigned(parts[4]);
  } else if (kind == "barbell" && parts.size() == 4) {
    spec.kind = SyntheticSpec::Kind::kBarbell;
    spec.clique_size = to_unsigned(parts[1]);
    spec.count = to_unsigned(parts[2]);
    spec.seed = to_unsigned(parts[3]);
  } else if (kind == "sbm" && parts.size() == 6) {
    spec.kind = SyntheticSpec::Kind::kSbm;
    for (const auto& size : split(parts[1], ',')) spec.block_sizes.push_back(to_unsigned(size));
    spec.p_in = to_double(parts[2]);
    spec.p_out = to_double(parts[3]);
    spec.count = to_unsigned(parts[4]);
    spec.seed = to_unsigned(parts[5]);
  } else {
    throw InvalidParams("unrecognized synthetic dataset spec '" + std::string(text) + "'");
  }
  spec.validate();
  return spec;
}

Graph erdos_renyi(std::size_t n_nodes, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(p);
  std::vector<std::uint8_t> slots(slot_count(n_nodes));
  for (auto& s : slots) s = coin(rng) ? 1 : 0;
  return Graph::from_slots(n_nodes, std::move(slots));
}

Graph barbell(std::size_t clique_size) {
  Graph g(2 * clique_size);
  for (std::size_t side = 0; side < 2; ++side) {
    const std::size_t base = side * clique_size;
    for (std::size_t i = 0; i < clique_size; ++i) {
      for (std::size_t j = i + 1; j < clique_size; ++j) g.set_edge(base + i, base + j, true);
    }
  }
  g.set_edge(clique_size - 1, clique_size, true);
  return g;
}

Graph stochastic_block_model(const std::vector<std::size_t>& sizes, double p_in, double p_out,
                             std::uint64_t seed) {
  std::vector<std::size_t> block;
  for (std::size_t b = 0; b < sizes.size(); ++b) block.insert(block.end(), sizes[b], b);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Graph g(block.size());
  for (std::size_t i = 0; i < block.size(); ++i) {
    for (std::size_t j = i + 1; j < block.size(); ++j) {
      const double p = block[i] == block[j] ? p_in : p_out;
      if (unit(rng) < p) g.set_edge(i, j, true);
    }
  }
  return g;
}

DatasetBundle generate_synthetic(const SyntheticSpec& spec,
                                 const std::function<Label(const Graph&)>& labeler) {
  spec.validate();
  DatasetBundle bundle;
  std::set<Label> classes;
  for (std::size_t i = 0; i < spec.count; ++i) {
    const std::uint64_t graph_seed = graph_rng(spec.seed, i)();
    Graph g;
    switch (spec.kind) {
      case SyntheticSpec::Kind::kErdosRenyi:
        bundle.name = "er";
        g = erdos_renyi(spec.n_nodes, spec.edge_probability, graph_seed);
        break;
      case SyntheticSpec::Kind::kBarbell:
        bundle.name = "barbell";
        g = barbell(spec.clique_size);
        break;
      case SyntheticSpec::Kind::kSbm:
        bundle.name = "sbm";
        g = stochastic_block_model(spec.block_sizes, spec.p_in, spec.p_out, graph_seed);
        break;
    }
    if (labeler) {
      g.set_label(labeler(g));
      classes.insert(*g.label());
    }
    bundle.graphs.push_back(std::move(g));
  }
  bundle.class_count = classes.size();
  return bundle;
}

}  // namespace hlgraph
