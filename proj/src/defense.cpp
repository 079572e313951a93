#include "hlgraph/defense.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "hlgraph/errors.hpp"

namespace hlgraph {

void LowRankConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw InvalidParams("gamma must lie in (0, 1]");
  if (!(binarize_threshold > 0.0 && binarize_threshold <= 1.0)) {
    throw InvalidParams("binarize threshold must lie in (0, 1]");
  }
}

std::size_t LowRankConfig::kept_rank(std::size_t n_nodes) const {
  const auto k = static_cast<std::size_t>(std::llround(gamma * static_cast<double>(n_nodes)));
  return std::clamp<std::size_t>(k, 1, std::max<std::size_t>(n_nodes, 1));
}

LowRankReconstruction low_rank_reconstruct(const Graph& graph, const LowRankConfig& config) {
  config.validate();
  const std::size_t n = graph.n_nodes();
  LowRankReconstruction out;
  out.matrix = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  if (n == 0) return out;

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(graph.adjacency_matrix());
  const Eigen::VectorXd& eigenvalues = solver.eigenvalues();
  const Eigen::MatrixXd& eigenvectors = solver.eigenvectors();

  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(eigenvalues(a)) > std::abs(eigenvalues(b));
  });

  out.kept = config.kept_rank(n);
  for (std::size_t r = 0; r < n; ++r) {
    const Eigen::Index idx = order[r];
    const double sigma = std::abs(eigenvalues(idx));
    out.singular_values.push_back(sigma < 1e-10 ? 0.0 : sigma);
    if (r < out.kept) {
      out.matrix += eigenvalues(idx) * eigenvectors.col(idx) * eigenvectors.col(idx).transpose();
    }
  }
  return out;
}

Graph low_rank_filter(const Graph& graph, const LowRankConfig& config) {
  const LowRankReconstruction rec = low_rank_reconstruct(graph, config);
  const std::size_t n = graph.n_nodes();
  Graph out = graph;
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j, ++k) {
      const auto a = static_cast<Eigen::Index>(i);
      const auto b = static_cast<Eigen::Index>(j);
      const bool present = rec.matrix(a, b) >= config.binarize_threshold ||
                           rec.matrix(b, a) >= config.binarize_threshold;
      if (present != graph.slot(k)) out.flip_slot(k);
    }
  }
  return out;
}

DefendedOracle::DefendedOracle(OraclePtr inner, LowRankConfig config)
    : inner_(std::move(inner)), config_(config) {
  if (!inner_) throw InvalidParams("DefendedOracle needs an inner oracle");
  config_.validate();
}

std::unique_ptr<HardLabelOracle> DefendedOracle::fresh() const {
  return std::make_unique<DefendedOracle>(inner_, config_);
}

Label DefendedOracle::predict(const Graph& graph) const {
  return predict_with(*inner_, low_rank_filter(graph, config_));
}

std::unique_ptr<HardLabelOracle> defended_oracle(OraclePtr inner, LowRankConfig config) {
  return std::make_unique<DefendedOracle>(std::move(inner), config);
}

}  // namespace hlgraph
