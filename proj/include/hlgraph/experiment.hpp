#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hlgraph/attack.hpp"
#include "hlgraph/dataset.hpp"
#include "hlgraph/oracle.hpp"
#include "hlgraph/report.hpp"

namespace hlgraph {

enum class AttackKind { kSignSgd, kRandom };

struct ExperimentConfig {
  std::string dataset;        // synthetic spec (see parse_synthetic_spec) or TUDataset directory
  std::string dataset_name;   // TUDataset file prefix; defaults to the directory name
  std::string oracle;         // see make_oracle
  AttackKind attack_kind = AttackKind::kSignSgd;
  AttackConfig attack;
  std::size_t n_trials = 1;
  std::optional<std::uint64_t> random_query_budget;  // required for the random attack
  std::optional<double> defense_gamma;               // attack a low-rank defended oracle
  std::size_t workers = 0;                           // 0: hardware concurrency
  std::optional<std::size_t> max_targets;
  std::optional<std::filesystem::path> out_json;
  std::optional<std::filesystem::path> out_csv;
  std::optional<std::filesystem::path> trace_dir;

  // Unknown keys and ill-typed values raise ConfigError.
  static ExperimentConfig from_json(const nlohmann::json& doc);
  static ExperimentConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
  void validate() const;
};

// Oracle specs:
//   structural:FEATURE:THRESHOLD            FEATURE in edge_count, triangle_count, max_degree
//   gin:WEIGHTS.json
//   gin-random:SEED[:H1,H2,...[:CLASSES]]   random weights; input width from feature_dim
OraclePtr make_oracle(std::string_view spec, int feature_dim = 1);

// Loads or generates the dataset. Synthetic graphs are labeled by `labeler`.
DatasetBundle load_dataset(const ExperimentConfig& config, const HardLabelOracle* labeler);

// Indices of graphs whose label the oracle predicts correctly. Uses its own
// fresh oracle instance, so no attack ledger is charged.
std::vector<std::size_t> select_targets(const HardLabelOracle& oracle, const DatasetBundle& bundle,
                                        std::optional<std::size_t> limit = std::nullopt);

// Seed of one (target, trial) run, derived from the experiment seed.
std::uint64_t run_seed(std::uint64_t seed, std::size_t target, std::size_t trial);

// Runs every (target, trial) pair on a worker pool, each on a fresh oracle
// ledger, and returns the records ordered by target then trial.
std::vector<AttackRecord> run_attacks(const ExperimentConfig& config, const HardLabelOracle& oracle,
                                      const DatasetBundle& bundle, const std::vector<std::size_t>& targets);

double clean_accuracy(const HardLabelOracle& oracle, const DatasetBundle& bundle);

// Evenly spaced values "a:b:step", inclusive of b.
std::vector<double> parse_range(std::string_view text);

ExperimentReport run_experiment(const ExperimentConfig& config);

std::vector<BudgetRow> budget_sweep(const ExperimentConfig& config, const std::vector<double>& budgets);

// Clean accuracy of the defended oracle for each gamma, plus SR of the attack
// against it when `with_attack` is set.
std::vector<DefenseRow> defense_sweep(const ExperimentConfig& config, const std::vector<double>& gammas,
                                      bool with_attack);

// Writes the JSON report, CSV rows and gradient traces where configured.
void write_outputs(const ExperimentReport& report, const ExperimentConfig& config);

}  // namespace hlgraph
