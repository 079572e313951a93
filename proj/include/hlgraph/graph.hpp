#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace hlgraph {

using Label = int;

// Number of candidate edge slots of a simple undirected graph on n nodes.
constexpr std::size_t slot_count(std::size_t n) { return n < 2 ? 0 : n * (n - 1) / 2; }

struct Edge {
  std::size_t u = 0;
  std::size_t v = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

// Bijection between node pairs (i, j), i < j, and flat slot indices laid out
// row-major over the upper triangle: (0,1), (0,2), ..., (0,n-1), (1,2), ...
class EdgeIndexMap {
 public:
  explicit EdgeIndexMap(std::size_t n_nodes);

  std::size_t n_nodes() const { return n_; }
  std::size_t size() const { return slot_count(n_); }

  // Throws DimensionMismatch unless i != j and both are below n_nodes.
  std::size_t flatten(std::size_t i, std::size_t j) const;
  Edge unflatten(std::size_t slot) const;

 private:
  std::size_t n_;
  std::vector<std::size_t> row_offset_;
};

// Undirected simple graph. Adjacency is kept as one byte per upper-triangular
// slot so the symmetric matrix is only ever a view of it.
class Graph {
 public:
  Graph() = default;
  explicit Graph(std::size_t n_nodes);
  Graph(std::size_t n_nodes, std::span<const Edge> edges);

  static Graph from_slots(std::size_t n_nodes, std::vector<std::uint8_t> slots);
  // Accepts any square 0/1 matrix that is symmetric with a zero diagonal.
  static Graph from_adjacency(const Eigen::MatrixXd& adjacency);

  std::size_t n_nodes() const { return n_; }
  std::size_t n_slots() const { return slots_.size(); }
  std::size_t n_edges() const;

  bool has_edge(std::size_t i, std::size_t j) const;
  bool slot(std::size_t k) const { return slots_[k] != 0; }
  std::span<const std::uint8_t> slots() const { return slots_; }

  void set_edge(std::size_t i, std::size_t j, bool present);
  void flip_slot(std::size_t k) { slots_[k] ^= 1U; }

  std::vector<Edge> edges() const;
  std::vector<std::vector<std::size_t>> adjacency_lists() const;
  std::vector<std::size_t> degrees() const;
  Eigen::MatrixXd adjacency_matrix() const;

  const std::optional<Eigen::MatrixXd>& features() const { return features_; }
  void set_features(Eigen::MatrixXd features);
  void clear_features() { features_.reset(); }

  const std::optional<Label>& label() const { return label_; }
  void set_label(std::optional<Label> y) { label_ = y; }

  // "N:bits" with one character per slot; used as a lookup key.
  std::string canonical_key() const;

  // Structural equality: node count and adjacency only.
  bool same_structure(const Graph& other) const { return n_ == other.n_ && slots_ == other.slots_; }

 private:
  std::size_t n_ = 0;
  std::vector<std::uint8_t> slots_;
  std::optional<Eigen::MatrixXd> features_;
  std::optional<Label> label_;
};

// Real-valued vector over the edge slots of a graph.
class PerturbationVector {
 public:
  PerturbationVector() = default;
  explicit PerturbationVector(std::size_t dim, double fill = 0.0) : values_(dim, fill) {}
  explicit PerturbationVector(std::vector<double> values) : values_(std::move(values)) {}

  std::size_t dim() const { return values_.size(); }
  double operator[](std::size_t k) const { return values_[k]; }
  double& operator[](std::size_t k) { return values_[k]; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  double l2_norm() const;
  double max_abs() const;
  bool has_positive() const;

  // this += scale * other
  PerturbationVector& axpy(double scale, const PerturbationVector& other);
  PerturbationVector scaled(double factor) const;

 private:
  std::vector<double> values_;
};

// Unit-norm copy of theta. Throws ZeroVector when the norm is zero.
PerturbationVector normalize(const PerturbationVector& theta);

// Flips slot k of the graph iff theta[k] >= threshold. Features and label
// are carried over untouched.
Graph apply_perturbation(const Graph& graph, const PerturbationVector& theta,
                         double threshold = 0.5);

// Number of slots in which the two graphs differ.
std::size_t flip_count(const Graph& a, const Graph& b);

// Fraction of flipped slots; equals ||A' - A||_0 / (N (N - 1)) over the full
// symmetric matrices.
double perturbation_rate(const Graph& original, const Graph& perturbed);

struct FlipLedger {
  std::vector<Edge> added;
  std::vector<Edge> removed;

  std::size_t total() const { return added.size() + removed.size(); }
};

FlipLedger flip_ledger(const Graph& original, const Graph& perturbed);

}  // namespace hlgraph
