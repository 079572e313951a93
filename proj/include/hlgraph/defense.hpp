#pragma once

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "hlgraph/graph.hpp"
#include "hlgraph/oracle.hpp"

namespace hlgraph {

struct LowRankConfig {
  double gamma = 1.0;               // fraction of singular values kept, in (0, 1]
  double binarize_threshold = 0.5;

  void validate() const;
  // k = max(1, round(gamma * n_nodes))
  std::size_t kept_rank(std::size_t n_nodes) const;
};

struct LowRankReconstruction {
  Eigen::MatrixXd matrix;                // real-valued rank-k reconstruction
  std::vector<double> singular_values;   // all of them, descending
  std::size_t kept = 0;
};

// Rank-k approximation of the adjacency matrix. For a symmetric matrix the
// singular values are the absolute eigenvalues, so the truncation keeps the
// k eigenpairs of largest magnitude.
LowRankReconstruction low_rank_reconstruct(const Graph& graph, const LowRankConfig& config);

// Reconstruction binarized at the threshold, symmetrized with a logical OR and
// with the diagonal cleared. Features and label are carried over.
Graph low_rank_filter(const Graph& graph, const LowRankConfig& config);

// Filters every queried graph before handing it to `inner`. One classify on
// this oracle is one query on its own ledger.
class DefendedOracle final : public HardLabelOracle {
 public:
  DefendedOracle(OraclePtr inner, LowRankConfig config);

  const LowRankConfig& config() const { return config_; }

  std::unique_ptr<HardLabelOracle> fresh() const override;

 protected:
  Label predict(const Graph& graph) const override;

 private:
  OraclePtr inner_;
  LowRankConfig config_;
};

std::unique_ptr<HardLabelOracle> defended_oracle(OraclePtr inner, LowRankConfig config);

}  // namespace hlgraph
