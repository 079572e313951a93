#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>

#include "hlgraph/graph.hpp"

namespace hlgraph {

// What a query was spent on. Every query lands in exactly one bucket.
enum class QueryPhase : std::size_t { kCgs = 0, kBinarySearch = 1, kQegc = 2, kOther = 3 };

inline constexpr std::size_t kQueryPhaseCount = 4;

std::string_view to_string(QueryPhase phase);

// Plain-value copy of a ledger.
struct QueryCounts {
  std::uint64_t cgs = 0;
  std::uint64_t binary_search = 0;
  std::uint64_t qegc = 0;
  std::uint64_t other = 0;

  std::uint64_t total() const { return cgs + binary_search + qegc + other; }
  QueryCounts& operator+=(const QueryCounts& rhs);
  friend QueryCounts operator-(QueryCounts lhs, const QueryCounts& rhs);
  friend bool operator==(const QueryCounts&, const QueryCounts&) = default;
};

// Thread-safe query counter. The total is reserved before the phase counter
// is bumped, so a budget can be enforced with one compare-exchange.
class QueryLedger {
 public:
  QueryLedger() = default;
  QueryLedger(const QueryLedger&) = delete;
  QueryLedger& operator=(const QueryLedger&) = delete;

  // Reserves one query; returns false (and counts nothing) when the budget
  // would be exceeded.
  bool try_record(QueryPhase phase, std::optional<std::uint64_t> budget);

  std::uint64_t total() const { return total_.load(std::memory_order_acquire); }
  std::uint64_t count(QueryPhase phase) const;
  QueryCounts snapshot() const;
  void reset();

 private:
  std::atomic<std::uint64_t> total_{0};
  std::array<std::atomic<std::uint64_t>, kQueryPhaseCount> per_phase_{};
};

// Hard-label black-box classifier. classify() is the only way an attack
// observes the model, and every call is charged to the ledger.
class HardLabelOracle {
 public:
  virtual ~HardLabelOracle() = default;

  // Throws BudgetExhausted once the ledger reached the query budget.
  Label classify(const Graph& graph, QueryPhase phase = QueryPhase::kOther);

  const QueryLedger& ledger() const { return ledger_; }
  QueryLedger& ledger() { return ledger_; }

  std::optional<std::uint64_t> query_budget() const { return budget_; }

  // Same classifier with a fresh, empty ledger; used to give each worker or
  // each attack run its own exact accounting.
  virtual std::unique_ptr<HardLabelOracle> fresh() const = 0;

 protected:
  HardLabelOracle() = default;
  explicit HardLabelOracle(std::optional<std::uint64_t> budget) : budget_(budget) {}

  virtual Label predict(const Graph& graph) const = 0;

  // Uncounted access to another oracle's classifier, for wrappers.
  static Label predict_with(const HardLabelOracle& inner, const Graph& graph) {
    return inner.predict(graph);
  }

 private:
  QueryLedger ledger_;
  std::optional<std::uint64_t> budget_;
};

using OraclePtr = std::shared_ptr<const HardLabelOracle>;

// What counts as a successful perturbation: any label other than the
// original one, or exactly the target label when one is set.
struct AttackGoal {
  Label original = 0;
  std::optional<Label> target;

  bool reached(Label label) const { return target ? label == *target : label != original; }
};

class FunctionOracle final : public HardLabelOracle {
 public:
  using Classifier = std::function<Label(const Graph&)>;

  explicit FunctionOracle(Classifier classifier);

  std::unique_ptr<HardLabelOracle> fresh() const override;

 protected:
  Label predict(const Graph& graph) const override { return classifier_(graph); }

 private:
  Classifier classifier_;
};

std::unique_ptr<HardLabelOracle> constant_oracle(Label label);

enum class StructuralFeature { kEdgeCount, kTriangleCount, kMaxDegree };

std::optional<StructuralFeature> parse_structural_feature(std::string_view name);
std::string_view to_string(StructuralFeature feature);
std::size_t structural_statistic(StructuralFeature feature, const Graph& graph);

// Labels 1 iff the structural statistic is at least the threshold.
class StructuralOracle final : public HardLabelOracle {
 public:
  StructuralOracle(StructuralFeature feature, std::size_t threshold);

  StructuralFeature feature() const { return feature_; }
  std::size_t threshold() const { return threshold_; }

  std::unique_ptr<HardLabelOracle> fresh() const override;

 protected:
  Label predict(const Graph& graph) const override;

 private:
  StructuralFeature feature_;
  std::size_t threshold_;
};

std::unique_ptr<HardLabelOracle> structural_oracle(StructuralFeature feature,
                                                   std::size_t threshold);

// Pure lookup keyed by Graph::canonical_key(); UnknownGraph on a miss.
class TableOracle final : public HardLabelOracle {
 public:
  using Table = std::unordered_map<std::string, Label>;

  explicit TableOracle(std::shared_ptr<const Table> labels);

  // Tabulates `labeler` over all 2^S graphs on n_nodes nodes (S <= 24).
  static std::unique_ptr<TableOracle> exhaustive(std::size_t n_nodes,
                                                 const std::function<Label(const Graph&)>& labeler);

  std::size_t size() const { return labels_->size(); }

  std::unique_ptr<HardLabelOracle> fresh() const override;

 protected:
  Label predict(const Graph& graph) const override;

 private:
  std::shared_ptr<const Table> labels_;
};

std::unique_ptr<HardLabelOracle> table_oracle(TableOracle::Table labels);

// Delegates to `inner` but enforces its own query cap on its own ledger.
class BudgetedOracle final : public HardLabelOracle {
 public:
  BudgetedOracle(OraclePtr inner, std::uint64_t max_queries);

  std::unique_ptr<HardLabelOracle> fresh() const override;

 protected:
  Label predict(const Graph& graph) const override { return predict_with(*inner_, graph); }

 private:
  OraclePtr inner_;
  std::uint64_t max_queries_;
};

std::unique_ptr<HardLabelOracle> with_budget(OraclePtr inner, std::uint64_t max_queries);

}  // namespace hlgraph
