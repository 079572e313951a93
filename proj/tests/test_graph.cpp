#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "hlgraph/errors.hpp"
#include "hlgraph/graph.hpp"

using namespace hlgraph;

namespace {

Graph triangle() {
  const Edge edges[] = {{0, 1}, {0, 2}, {1, 2}};
  return Graph(3, edges);
}

Graph random_graph(std::size_t n, double p, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(p);
  Graph g(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) g.set_edge(i, j, coin(rng));
  return g;
}

}  // namespace

TEST_CASE("edge index map round trip") {
  for (std::size_t n : {2u, 3u, 7u, 30u}) {
    EdgeIndexMap map(n);
    CHECK(map.size() == n * (n - 1) / 2);
    std::size_t expected = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const std::size_t k = map.flatten(i, j);
        CHECK(k == expected++);
        CHECK(map.flatten(j, i) == k);
        CHECK(map.unflatten(k) == Edge{i, j});
      }
    }
  }
  EdgeIndexMap map(4);
  CHECK_THROWS_AS(map.flatten(1, 1), DimensionMismatch);
  CHECK_THROWS_AS(map.flatten(0, 4), DimensionMismatch);
}

TEST_CASE("graph construction and invariants") {
  const Graph g = triangle();
  CHECK(g.n_nodes() == 3);
  CHECK(g.n_slots() == 3);
  CHECK(g.n_edges() == 3);
  const Eigen::MatrixXd a = g.adjacency_matrix();
  CHECK(a.isApprox(a.transpose()));
  CHECK(a.diagonal().isZero());
  CHECK(Graph::from_adjacency(a).same_structure(g));

  Eigen::MatrixXd asym = a;
  asym(0, 1) = 0.0;
  CHECK_THROWS(Graph::from_adjacency(asym));
  Eigen::MatrixXd loop = a;
  loop(2, 2) = 1.0;
  CHECK_THROWS(Graph::from_adjacency(loop));
  CHECK_FALSE(g.has_edge(0, 0));
  CHECK_THROWS_AS(g.has_edge(0, 3), DimensionMismatch);

  Graph f(3);
  CHECK_THROWS_AS(f.set_features(Eigen::MatrixXd::Ones(2, 4)), DimensionMismatch);
  f.set_features(Eigen::MatrixXd::Ones(3, 4));
  CHECK(f.features()->cols() == 4);
}

TEST_CASE("apply_perturbation examples") {
  const Graph k3 = triangle();
  CHECK(apply_perturbation(k3, PerturbationVector(3)).same_structure(k3));

  PerturbationVector first(3);
  first[0] = 1.0;
  const Graph path = apply_perturbation(k3, first);
  CHECK_FALSE(path.has_edge(0, 1));
  CHECK(path.has_edge(0, 2));
  CHECK(path.has_edge(1, 2));
  CHECK(k3.n_edges() == 3);

  const Graph added = apply_perturbation(Graph(3), PerturbationVector(std::vector<double>{0.6, 0.4, 0.5}));
  CHECK(added.slot(0));
  CHECK_FALSE(added.slot(1));
  CHECK(added.slot(2));

  CHECK_THROWS_AS(apply_perturbation(k3, PerturbationVector(4)), DimensionMismatch);
  CHECK_THROWS_AS(apply_perturbation(k3, PerturbationVector(3), 0.0), InvalidParams);
}

TEST_CASE("apply_perturbation keeps features and label") {
  Graph g = triangle();
  g.set_features(Eigen::MatrixXd::Constant(3, 2, 0.5));
  g.set_label(1);
  PerturbationVector theta(3, 1.0);
  const Graph h = apply_perturbation(g, theta);
  CHECK(h.n_edges() == 0);
  REQUIRE(h.features());
  CHECK(h.features()->isApprox(*g.features()));
  CHECK(h.label() == 1);
}

TEST_CASE("perturbation_rate examples") {
  Graph a(4);
  CHECK(perturbation_rate(a, a) == 0.0);
  Graph one = a;
  one.set_edge(1, 3, true);
  CHECK(perturbation_rate(a, one) == doctest::Approx(1.0 / 6.0));
  Graph all = a;
  for (std::size_t k = 0; k < all.n_slots(); ++k) all.flip_slot(k);
  CHECK(perturbation_rate(a, all) == 1.0);
  CHECK_THROWS_AS(perturbation_rate(a, Graph(5)), DimensionMismatch);
}

TEST_CASE("flip_ledger examples") {
  const Graph k3 = triangle();
  const Graph empty(3);
  auto same = flip_ledger(k3, k3);
  CHECK(same.added.empty());
  CHECK(same.removed.empty());

  auto grow = flip_ledger(empty, k3);
  CHECK(grow.added.size() == 3);
  CHECK(grow.removed.empty());

  Graph path = k3;
  path.set_edge(0, 1, false);
  auto cut = flip_ledger(k3, path);
  CHECK(cut.added.empty());
  REQUIRE(cut.removed.size() == 1);
  CHECK(cut.removed[0] == Edge{0, 1});
  CHECK_THROWS_AS(flip_ledger(k3, Graph(4)), DimensionMismatch);
}

TEST_CASE("normalize examples") {
  const auto unit = normalize(PerturbationVector(std::vector<double>{3.0, 4.0, 0.0}));
  CHECK(unit[0] == doctest::Approx(0.6));
  CHECK(unit[1] == doctest::Approx(0.8));
  CHECK(unit[2] == 0.0);
  const auto again = normalize(unit);
  for (std::size_t k = 0; k < 3; ++k) CHECK(again[k] == doctest::Approx(unit[k]).epsilon(1e-15));
  CHECK_THROWS_AS(normalize(PerturbationVector(3)), ZeroVector);
}

TEST_CASE("property: involution, rate consistency, ledger completeness") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 3 + rng() % 28;
    const Graph a = random_graph(n, unit(rng), rng);
    PerturbationVector theta(a.n_slots());
    std::size_t above = 0;
    for (std::size_t k = 0; k < theta.dim(); ++k) {
      theta[k] = unit(rng);
      if (theta[k] >= 0.5) ++above;
    }
    PerturbationVector binary(a.n_slots());
    for (std::size_t k = 0; k < theta.dim(); ++k) binary[k] = theta[k] >= 0.5 ? 1.0 : 0.0;

    const Graph b = apply_perturbation(a, theta);
    CHECK(apply_perturbation(b, binary).same_structure(a));
    CHECK(perturbation_rate(a, b) == doctest::Approx(static_cast<double>(above) / a.n_slots()));

    const auto ledger = flip_ledger(a, b);
    CHECK(ledger.total() == above);
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& e : ledger.added) {
      CHECK_FALSE(a.has_edge(e.u, e.v));
      CHECK(b.has_edge(e.u, e.v));
      seen.insert({e.u, e.v});
    }
    for (const auto& e : ledger.removed) {
      CHECK(a.has_edge(e.u, e.v));
      CHECK_FALSE(b.has_edge(e.u, e.v));
      seen.insert({e.u, e.v});
    }
    CHECK(seen.size() == above);
  }
}

TEST_CASE("perturbation vector helpers") {
  PerturbationVector v(std::vector<double>{-2.0, 1.0, 0.0});
  CHECK(v.max_abs() == 2.0);
  CHECK(v.has_positive());
  CHECK(v.l2_norm() == doctest::Approx(std::sqrt(5.0)));
  v.axpy(2.0, PerturbationVector(std::vector<double>{1.0, -1.0, 0.5}));
  CHECK(v[0] == 0.0);
  CHECK(v[1] == -1.0);
  CHECK(v[2] == 1.0);
  CHECK(v.scaled(-1.0)[2] == -1.0);
  CHECK_FALSE(PerturbationVector(std::vector<double>{-1.0, 0.0}).has_positive());
}

TEST_CASE("canonical key and degrees") {
  const Graph g = triangle();
  CHECK(g.canonical_key() == "3:111");
  CHECK(Graph(3).canonical_key() == "3:000");
  CHECK(g.degrees() == std::vector<std::size_t>{2, 2, 2});
  CHECK(g.adjacency_lists()[0] == std::vector<std::size_t>{1, 2});
}
