#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "hlgraph/dataset.hpp"
#include "hlgraph/defense.hpp"
#include "hlgraph/errors.hpp"
#include "hlgraph/gin.hpp"

using namespace hlgraph;

namespace {

Graph clique(std::size_t n) {
  Graph g(n);
  for (std::size_t k = 0; k < g.n_slots(); ++k) g.flip_slot(k);
  return g;
}

bool valid(const Graph& g) {
  const Eigen::MatrixXd a = g.adjacency_matrix();
  return a.isApprox(a.transpose()) && a.diagonal().isZero();
}

}  // namespace

TEST_CASE("gamma = 1 is the identity") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 20;
    const Graph g = erdos_renyi(n, unit(rng), rng());
    const auto rec = low_rank_reconstruct(g, LowRankConfig{1.0});
    CHECK((rec.matrix - g.adjacency_matrix()).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(low_rank_filter(g, LowRankConfig{1.0}).same_structure(g));
  }
}

TEST_CASE("K4 keeps its top singular value and survives") {
  const Graph k4 = clique(4);
  const LowRankConfig config{0.25};
  CHECK(config.kept_rank(4) == 1);
  const auto rec = low_rank_reconstruct(k4, config);
  REQUIRE(rec.singular_values.size() == 4);
  CHECK(rec.singular_values[0] == doctest::Approx(3.0));
  for (int i = 1; i < 4; ++i) CHECK(rec.singular_values[i] == doctest::Approx(1.0));
  CHECK((rec.matrix - Eigen::MatrixXd::Constant(4, 4, 0.75)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(low_rank_filter(k4, config).same_structure(k4));
}

TEST_CASE("edgeless graph stays edgeless") {
  for (double gamma : {0.05, 0.5, 1.0}) {
    const auto rec = low_rank_reconstruct(Graph(6), LowRankConfig{gamma});
    for (double s : rec.singular_values) CHECK(s == 0.0);
    CHECK(low_rank_filter(Graph(6), LowRankConfig{gamma}).n_edges() == 0);
  }
}

TEST_CASE("kept rank, ordering and output validity") {
  CHECK(LowRankConfig{0.05}.kept_rank(4) == 1);
  CHECK(LowRankConfig{0.5}.kept_rank(10) == 5);
  CHECK_THROWS_AS(LowRankConfig{0.0}.validate(), InvalidParams);
  CHECK_THROWS_AS(LowRankConfig{1.5}.validate(), InvalidParams);
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const Graph g = erdos_renyi(12, 0.4, rng());
    const LowRankConfig config{0.3};
    const auto rec = low_rank_reconstruct(g, config);
    for (std::size_t i = 1; i < rec.singular_values.size(); ++i)
      CHECK(rec.singular_values[i - 1] >= rec.singular_values[i]);
    // the kept spectrum carries the largest mass
    const Eigen::VectorXd eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(g.adjacency_matrix()).eigenvalues();
    const double kept_mass = rec.matrix.squaredNorm();
    std::vector<double> squares;
    for (Eigen::Index i = 0; i < eig.size(); ++i) squares.push_back(eig(i) * eig(i));
    std::sort(squares.rbegin(), squares.rend());
    double top = 0.0;
    for (std::size_t i = 0; i < rec.kept; ++i) top += squares[i];
    CHECK(kept_mass == doctest::Approx(top).epsilon(1e-9));
    CHECK(valid(low_rank_filter(g, config)));
  }
}

TEST_CASE("filter carries features and label") {
  Graph g = clique(4);
  g.set_features(Eigen::MatrixXd::Ones(4, 2));
  g.set_label(1);
  const Graph f = low_rank_filter(g, LowRankConfig{0.5});
  CHECK(f.label() == 1);
  CHECK(f.features().has_value());
}

TEST_CASE("defended oracle") {
  const OraclePtr gin = std::make_shared<GinOracle>(
      std::make_shared<const GinWeights>(GinWeights::random(5, 1, {8, 8}, 2)));
  auto identity = defended_oracle(gin, LowRankConfig{1.0});
  auto reference = gin->fresh();
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const Graph g = erdos_renyi(10, 0.3, rng());
    CHECK(identity->classify(g) == reference->classify(g));
  }
  CHECK(identity->ledger().total() == 100);
  CHECK(gin->ledger().total() == 0);

  const Graph k4 = clique(4);
  auto coarse = defended_oracle(gin, LowRankConfig{0.25});
  CHECK(coarse->classify(k4) == reference->classify(low_rank_filter(k4, LowRankConfig{0.25})));
  CHECK(coarse->fresh()->ledger().total() == 0);
}
