#include "hlgraph/graph.hpp"

#include <algorithm>
#include <cmath>

#include "hlgraph/errors.hpp"

namespace hlgraph {

EdgeIndexMap::EdgeIndexMap(std::size_t n_nodes) : n_(n_nodes), row_offset_(n_nodes + 1, 0) {
  for (std::size_t i = 0; i < n_; ++i) {
    row_offset_[i + 1] = row_offset_[i] + (n_ - i - 1);
  }
}

std::size_t EdgeIndexMap::flatten(std::size_t i, std::size_t j) const {
  if (i == j || i >= n_ || j >= n_) {
    throw DimensionMismatch("invalid node pair (" + std::to_string(i) + ", " +
                            std::to_string(j) + ") for a graph on " + std::to_string(n_) +
                            " nodes");
  }
  if (i > j) std::swap(i, j);
  return row_offset_[i] + (j - i - 1);
}

Edge EdgeIndexMap::unflatten(std::size_t slot) const {
  if (slot >= size()) {
    throw DimensionMismatch("slot " + std::to_string(slot) + " out of range");
  }
  // Row i owns [row_offset_[i], row_offset_[i + 1]).
  auto it = std::upper_bound(row_offset_.begin(), row_offset_.end(), slot);
  const auto i = static_cast<std::size_t>(std::distance(row_offset_.begin(), it)) - 1;
  return {i, i + 1 + (slot - row_offset_[i])};
}

Graph::Graph(std::size_t n_nodes) : n_(n_nodes), slots_(slot_count(n_nodes), 0) {}

Graph::Graph(std::size_t n_nodes, std::span<const Edge> edges) : Graph(n_nodes) {
  for (const auto& e : edges) set_edge(e.u, e.v, true);
}

Graph Graph::from_slots(std::size_t n_nodes, std::vector<std::uint8_t> slots) {
  if (slots.size() != slot_count(n_nodes)) {
    throw DimensionMismatch("expected " + std::to_string(slot_count(n_nodes)) +
                            " slots, got " + std::to_string(slots.size()));
  }
  Graph g;
  g.n_ = n_nodes;
  g.slots_ = std::move(slots);
  for (auto& s : g.slots_) s = s != 0 ? 1 : 0;
  return g;
}

Graph Graph::from_adjacency(const Eigen::MatrixXd& adjacency) {
  if (adjacency.rows() != adjacency.cols()) {
    throw DimensionMismatch("adjacency matrix must be square");
  }
  const auto n = static_cast<std::size_t>(adjacency.rows());
  Graph g(n);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < adjacency.rows(); ++i) {
    if (adjacency(i, i) != 0.0) throw InvalidParams("adjacency has a self-loop");
    for (Eigen::Index j = i + 1; j < adjacency.cols(); ++j, ++k) {
      const double a = adjacency(i, j);
      if (a != adjacency(j, i)) throw InvalidParams("adjacency is not symmetric");
      if (a != 0.0 && a != 1.0) throw InvalidParams("adjacency is not binary");
      g.slots_[k] = a != 0.0 ? 1 : 0;
    }
  }
  return g;
}

std::size_t Graph::n_edges() const {
  return static_cast<std::size_t>(std::count(slots_.begin(), slots_.end(), std::uint8_t{1}));
}

namespace {

std::size_t pair_slot(std::size_t n, std::size_t i, std::size_t j) {
  if (i >= n || j >= n) {
    throw DimensionMismatch("node index out of range for a graph on " + std::to_string(n) +
                            " nodes");
  }
  if (i > j) std::swap(i, j);
  return i * n - i * (i + 1) / 2 + (j - i - 1);
}

}  // namespace

bool Graph::has_edge(std::size_t i, std::size_t j) const {
  if (i == j) return false;
  return slots_[pair_slot(n_, i, j)] != 0;
}

void Graph::set_edge(std::size_t i, std::size_t j, bool present) {
  if (i == j) throw InvalidParams("self-loops are not allowed");
  slots_[pair_slot(n_, i, j)] = present ? 1 : 0;
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  std::size_t k = 0;
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i + 1; j < n_; ++j, ++k) {
      if (slots_[k] != 0) out.push_back({i, j});
    }
  }
  return out;
}

std::vector<std::vector<std::size_t>> Graph::adjacency_lists() const {
  std::vector<std::vector<std::size_t>> adj(n_);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i + 1; j < n_; ++j, ++k) {
      if (slots_[k] != 0) {
        adj[i].push_back(j);
        adj[j].push_back(i);
      }
    }
  }
  return adj;
}

std::vector<std::size_t> Graph::degrees() const {
  std::vector<std::size_t> deg(n_, 0);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i + 1; j < n_; ++j, ++k) {
      if (slots_[k] != 0) {
        ++deg[i];
        ++deg[j];
      }
    }
  }
  return deg;
}

Eigen::MatrixXd Graph::adjacency_matrix() const {
  const auto n = static_cast<Eigen::Index>(n_);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j, ++k) {
      if (slots_[k] != 0) {
        a(i, j) = 1.0;
        a(j, i) = 1.0;
      }
    }
  }
  return a;
}

void Graph::set_features(Eigen::MatrixXd features) {
  if (static_cast<std::size_t>(features.rows()) != n_) {
    throw DimensionMismatch("feature matrix has " + std::to_string(features.rows()) +
                            " rows for a graph on " + std::to_string(n_) + " nodes");
  }
  features_ = std::move(features);
}

std::string Graph::canonical_key() const {
  std::string key = std::to_string(n_) + ":";
  key.reserve(key.size() + slots_.size());
  for (auto s : slots_) key.push_back(s != 0 ? '1' : '0');
  return key;
}

double PerturbationVector::l2_norm() const {
  double sum = 0.0;
  for (double v : values_) sum += v * v;
  return std::sqrt(sum);
}

double PerturbationVector::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

bool PerturbationVector::has_positive() const {
  return std::any_of(values_.begin(), values_.end(), [](double v) { return v > 0.0; });
}

PerturbationVector& PerturbationVector::axpy(double scale, const PerturbationVector& other) {
  if (other.dim() != dim()) throw DimensionMismatch("axpy on vectors of different dimension");
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += scale * other.values_[k];
  return *this;
}

PerturbationVector PerturbationVector::scaled(double factor) const {
  PerturbationVector out = *this;
  for (auto& v : out.values_) v *= factor;
  return out;
}

PerturbationVector normalize(const PerturbationVector& theta) {
  const double norm = theta.l2_norm();
  if (!(norm > 0.0)) throw ZeroVector("cannot normalize a zero perturbation vector");
  return theta.scaled(1.0 / norm);
}

Graph apply_perturbation(const Graph& graph, const PerturbationVector& theta, double threshold) {
  if (theta.dim() != graph.n_slots()) {
    throw DimensionMismatch("perturbation has dimension " + std::to_string(theta.dim()) +
                            " but the graph has " + std::to_string(graph.n_slots()) + " slots");
  }
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw InvalidParams("flip threshold must lie in (0, 1]");
  }
  Graph out = graph;
  for (std::size_t k = 0; k < theta.dim(); ++k) {
    if (theta[k] >= threshold) out.flip_slot(k);
  }
  return out;
}

namespace {

void require_same_size(const Graph& a, const Graph& b) {
  if (a.n_nodes() != b.n_nodes()) {
    throw DimensionMismatch("graphs have " + std::to_string(a.n_nodes()) + " and " +
                            std::to_string(b.n_nodes()) + " nodes");
  }
}

}  // namespace

std::size_t flip_count(const Graph& a, const Graph& b) {
  require_same_size(a, b);
  std::size_t flips = 0;
  const auto sa = a.slots();
  const auto sb = b.slots();
  for (std::size_t k = 0; k < sa.size(); ++k) flips += sa[k] != sb[k] ? 1 : 0;
  return flips;
}

double perturbation_rate(const Graph& original, const Graph& perturbed) {
  const std::size_t flips = flip_count(original, perturbed);
  const std::size_t n = original.n_nodes();
  if (n < 2) return 0.0;
  // Each flipped slot changes two entries of the symmetric matrix.
  return static_cast<double>(2 * flips) / static_cast<double>(n * (n - 1));
}

FlipLedger flip_ledger(const Graph& original, const Graph& perturbed) {
  require_same_size(original, perturbed);
  FlipLedger ledger;
  const EdgeIndexMap index(original.n_nodes());
  for (std::size_t k = 0; k < original.n_slots(); ++k) {
    if (original.slot(k) == perturbed.slot(k)) continue;
    (perturbed.slot(k) ? ledger.added : ledger.removed).push_back(index.unflatten(k));
  }
  return ledger;
}

}  // namespace hlgraph
