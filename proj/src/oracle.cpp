#include "hlgraph/oracle.hpp"

#include <algorithm>

#include "hlgraph/errors.hpp"

namespace hlgraph {

std::string_view to_string(QueryPhase phase) {
  switch (phase) {
    case QueryPhase::kCgs:
      return "cgs";
    case QueryPhase::kBinarySearch:
      return "binary_search";
    case QueryPhase::kQegc:
      return "qegc";
    case QueryPhase::kOther:
      return "other";
  }
  return "other";
}

QueryCounts& QueryCounts::operator+=(const QueryCounts& rhs) {
  cgs += rhs.cgs;
  binary_search += rhs.binary_search;
  qegc += rhs.qegc;
  other += rhs.other;
  return *this;
}

QueryCounts operator-(QueryCounts lhs, const QueryCounts& rhs) {
  lhs.cgs -= rhs.cgs;
  lhs.binary_search -= rhs.binary_search;
  lhs.qegc -= rhs.qegc;
  lhs.other -= rhs.other;
  return lhs;
}

bool QueryLedger::try_record(QueryPhase phase, std::optional<std::uint64_t> budget) {
  std::uint64_t current = total_.load(std::memory_order_relaxed);
  do {
    if (budget && current >= *budget) return false;
  } while (!total_.compare_exchange_weak(current, current + 1, std::memory_order_acq_rel));
  per_phase_[static_cast<std::size_t>(phase)].fetch_add(1, std::memory_order_acq_rel);
  return true;
}

std::uint64_t QueryLedger::count(QueryPhase phase) const {
  return per_phase_[static_cast<std::size_t>(phase)].load(std::memory_order_acquire);
}

QueryCounts QueryLedger::snapshot() const {
  return {count(QueryPhase::kCgs), count(QueryPhase::kBinarySearch), count(QueryPhase::kQegc),
          count(QueryPhase::kOther)};
}

void QueryLedger::reset() {
  total_.store(0);
  for (auto& c : per_phase_) c.store(0);
}

Label HardLabelOracle::classify(const Graph& graph, QueryPhase phase) {
  if (!ledger_.try_record(phase, budget_)) throw BudgetExhausted(*budget_);
  return predict(graph);
}

FunctionOracle::FunctionOracle(Classifier classifier) : classifier_(std::move(classifier)) {
  if (!classifier_) throw InvalidParams("FunctionOracle needs a callable classifier");
}

std::unique_ptr<HardLabelOracle> FunctionOracle::fresh() const {
  return std::make_unique<FunctionOracle>(classifier_);
}

std::unique_ptr<HardLabelOracle> constant_oracle(Label label) {
  return std::make_unique<FunctionOracle>([label](const Graph&) { return label; });
}

std::optional<StructuralFeature> parse_structural_feature(std::string_view name) {
  if (name == "edge_count") return StructuralFeature::kEdgeCount;
  if (name == "triangle_count") return StructuralFeature::kTriangleCount;
  if (name == "max_degree") return StructuralFeature::kMaxDegree;
  return std::nullopt;
}

std::string_view to_string(StructuralFeature feature) {
  switch (feature) {
    case StructuralFeature::kEdgeCount:
      return "edge_count";
    case StructuralFeature::kTriangleCount:
      return "triangle_count";
    case StructuralFeature::kMaxDegree:
      return "max_degree";
  }
  return "edge_count";
}

std::size_t structural_statistic(StructuralFeature feature, const Graph& graph) {
  switch (feature) {
    case StructuralFeature::kEdgeCount:
      return graph.n_edges();
    case StructuralFeature::kMaxDegree: {
      const auto deg = graph.degrees();
      return deg.empty() ? 0 : *std::max_element(deg.begin(), deg.end());
    }
    case StructuralFeature::kTriangleCount: {
      const auto adj = graph.adjacency_lists();
      std::size_t triangles = 0;
      // Count each triangle once via its increasing node triple.
      for (std::size_t u = 0; u < adj.size(); ++u) {
        for (std::size_t v : adj[u]) {
          if (v <= u) continue;
          for (std::size_t w : adj[v]) {
            if (w > v && graph.has_edge(u, w)) ++triangles;
          }
        }
      }
      return triangles;
    }
  }
  return 0;
}

StructuralOracle::StructuralOracle(StructuralFeature feature, std::size_t threshold)
    : feature_(feature), threshold_(threshold) {}

std::unique_ptr<HardLabelOracle> StructuralOracle::fresh() const {
  return std::make_unique<StructuralOracle>(feature_, threshold_);
}

Label StructuralOracle::predict(const Graph& graph) const {
  return structural_statistic(feature_, graph) >= threshold_ ? 1 : 0;
}

std::unique_ptr<HardLabelOracle> structural_oracle(StructuralFeature feature,
                                                   std::size_t threshold) {
  return std::make_unique<StructuralOracle>(feature, threshold);
}

TableOracle::TableOracle(std::shared_ptr<const Table> labels) : labels_(std::move(labels)) {
  if (!labels_) throw InvalidParams("TableOracle needs a label table");
}

std::unique_ptr<TableOracle> TableOracle::exhaustive(
    std::size_t n_nodes, const std::function<Label(const Graph&)>& labeler) {
  const std::size_t slots = slot_count(n_nodes);
  if (slots > 24) throw InvalidParams("exhaustive table limited to 24 slots");
  auto table = std::make_shared<Table>();
  table->reserve(std::size_t{1} << slots);
  for (std::uint64_t code = 0; code < (std::uint64_t{1} << slots); ++code) {
    std::vector<std::uint8_t> bits(slots);
    for (std::size_t k = 0; k < slots; ++k) bits[k] = (code >> k) & 1U;
    const Graph g = Graph::from_slots(n_nodes, std::move(bits));
    table->emplace(g.canonical_key(), labeler(g));
  }
  return std::make_unique<TableOracle>(std::move(table));
}

std::unique_ptr<HardLabelOracle> TableOracle::fresh() const {
  return std::make_unique<TableOracle>(labels_);
}

Label TableOracle::predict(const Graph& graph) const {
  const auto it = labels_->find(graph.canonical_key());
  if (it == labels_->end()) throw UnknownGraph("no label for graph " + graph.canonical_key());
  return it->second;
}

std::unique_ptr<HardLabelOracle> table_oracle(TableOracle::Table labels) {
  return std::make_unique<TableOracle>(std::make_shared<const TableOracle::Table>(std::move(labels)));
}

BudgetedOracle::BudgetedOracle(OraclePtr inner, std::uint64_t max_queries)
    : HardLabelOracle(max_queries), inner_(std::move(inner)), max_queries_(max_queries) {
  if (!inner_) throw InvalidParams("BudgetedOracle needs an inner oracle");
  if (max_queries == 0) throw InvalidParams("query budget must be positive");
}

std::unique_ptr<HardLabelOracle> BudgetedOracle::fresh() const {
  return std::make_unique<BudgetedOracle>(inner_, max_queries_);
}

std::unique_ptr<HardLabelOracle> with_budget(OraclePtr inner, std::uint64_t max_queries) {
  return std::make_unique<BudgetedOracle>(std::move(inner), max_queries);
}

}  // namespace hlgraph
