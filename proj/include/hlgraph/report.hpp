#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hlgraph/attack.hpp"
#include "hlgraph/oracle.hpp"
#include "hlgraph/partition.hpp"

namespace hlgraph {

// One attack run on one target graph.
struct AttackRecord {
  std::size_t id = 0;     // target index within the dataset
  std::size_t trial = 0;
  bool success = false;
  std::size_t flips_added = 0;
  std::size_t flips_removed = 0;
  double rate = 0.0;
  QueryCounts queries;
  double time_s = 0.0;
  std::optional<ComponentKind> found_in;
  std::vector<double> gradient_norms;
  std::vector<double> p_trace;

  std::size_t flips() const { return flips_added + flips_removed; }

  static AttackRecord from_result(std::size_t id, std::size_t trial, const AttackResult& result);
};

// SR = successes / runs. AP and the added/removed averages cover successes
// only and are empty without any. AQ and AT cover every run.
struct Aggregates {
  std::size_t runs = 0;
  std::size_t successes = 0;
  double sr = 0.0;
  std::optional<double> ap;
  double aq = 0.0;
  double at = 0.0;
  std::optional<double> avg_added;
  std::optional<double> avg_removed;
};

Aggregates aggregate(const std::vector<AttackRecord>& records);

struct DefenseRow {
  double gamma = 1.0;
  double clean_accuracy = 0.0;
  std::optional<double> sr;
};

struct BudgetRow {
  double budget = 0.0;
  Aggregates aggregates;
};

struct ExperimentReport {
  nlohmann::json config = nlohmann::json::object();
  std::vector<AttackRecord> per_graph;
  Aggregates aggregates;
  std::vector<DefenseRow> defense;
  std::vector<BudgetRow> budget_sweep;

  nlohmann::json to_json() const;
  static ExperimentReport from_json(const nlohmann::json& doc);

  // Per-graph rows; wall time is the last column.
  void write_csv(std::ostream& out) const;
  void write_defense_csv(std::ostream& out) const;
  void write_budget_csv(std::ostream& out) const;

  // One "trace_<id>_<trial>.csv" file per run with the gradient-norm and
  // surrogate traces. Returns the files written.
  std::vector<std::filesystem::path> write_traces(const std::filesystem::path& dir) const;
};

}  // namespace hlgraph
