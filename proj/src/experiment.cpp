#include "hlgraph/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "hlgraph/baseline.hpp"
#include "hlgraph/defense.hpp"
#include "hlgraph/errors.hpp"
#include "hlgraph/gin.hpp"

namespace hlgraph {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "dataset", "dataset_name", "oracle", "attack", "budget", "strategy", "Q", "mu", "T", "epsilon",
      "seed", "learning_rate", "schedule", "max_queries", "target", "trials_scale", "n_trials",
      "random_query_budget", "defense_gamma", "workers", "max_targets", "out_json", "out_csv",
      "trace_dir"};
  return keys;
}

template <typename T>
T get(const json& doc, const char* key, T fallback) {
  if (!doc.contains(key)) return fallback;
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config key '") + key + "' has the wrong type");
  }
}

template <typename T>
std::optional<T> get_optional(const json& doc, const char* key) {
  if (!doc.contains(key) || doc.at(key).is_null()) return std::nullopt;
  return get<T>(doc, key, T{});
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> parts(1);
  for (char c : text) {
    if (c == sep) {
      parts.emplace_back();
    } else {
      parts.back().push_back(c);
    }
  }
  return parts;
}

std::uint64_t parse_u64(const std::string& s, std::string_view what) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(s, &used);
    if (used == s.size() && !s.empty() && s.front() != '-') return v;
  } catch (const std::logic_error&) {
  }
  throw ConfigError("bad " + std::string(what) + " '" + s + "'");
}

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (std::find(known_keys().begin(), known_keys().end(), key) == known_keys().end()) {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  ExperimentConfig c;
  c.dataset = get<std::string>(doc, "dataset", "");
  c.dataset_name = get<std::string>(doc, "dataset_name", "");
  c.oracle = get<std::string>(doc, "oracle", "");
  const auto kind = get<std::string>(doc, "attack", "signsgd");
  if (kind == "signsgd") {
    c.attack_kind = AttackKind::kSignSgd;
  } else if (kind == "random") {
    c.attack_kind = AttackKind::kRandom;
  } else {
    throw ConfigError("attack must be 'signsgd' or 'random'");
  }
  auto& a = c.attack;
  a.budget = get<double>(doc, "budget", a.budget);
  const auto strategy = parse_strategy(get<std::string>(doc, "strategy", "I"));
  if (!strategy) throw ConfigError("strategy must be I, II or III");
  a.strategy = *strategy;
  a.directions = get<std::size_t>(doc, "Q", a.directions);
  a.smoothing = get<double>(doc, "mu", a.smoothing);
  a.iterations = get<std::size_t>(doc, "T", a.iterations);
  a.tolerance = get<double>(doc, "epsilon", a.tolerance);
  a.seed = get<std::uint64_t>(doc, "seed", a.seed);
  a.learning_rate_scale = get<double>(doc, "learning_rate", a.learning_rate_scale);
  const auto schedule = get<std::string>(doc, "schedule", "constant");
  if (schedule == "constant") {
    a.schedule = LearningRateSchedule::kConstant;
  } else if (schedule == "inverse_sqrt_dt") {
    a.schedule = LearningRateSchedule::kInverseSqrtDT;
  } else {
    throw ConfigError("schedule must be 'constant' or 'inverse_sqrt_dt'");
  }
  a.max_queries = get_optional<std::uint64_t>(doc, "max_queries");
  a.target = get_optional<int>(doc, "target");
  a.trials_scale = get<std::size_t>(doc, "trials_scale", a.trials_scale);
  c.n_trials = get<std::size_t>(doc, "n_trials", c.n_trials);
  c.random_query_budget = get_optional<std::uint64_t>(doc, "random_query_budget");
  c.defense_gamma = get_optional<double>(doc, "defense_gamma");
  c.workers = get<std::size_t>(doc, "workers", c.workers);
  c.max_targets = get_optional<std::size_t>(doc, "max_targets");
  if (auto p = get_optional<std::string>(doc, "out_json")) c.out_json = *p;
  if (auto p = get_optional<std::string>(doc, "out_csv")) c.out_csv = *p;
  if (auto p = get_optional<std::string>(doc, "trace_dir")) c.trace_dir = *p;
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return from_json(doc);
}

json ExperimentConfig::to_json() const {
  const auto& a = attack;
  json doc = {{"dataset", dataset},
              {"oracle", oracle},
              {"attack", attack_kind == AttackKind::kSignSgd ? "signsgd" : "random"},
              {"budget", a.budget},
              {"strategy", std::string(to_string(a.strategy))},
              {"Q", a.directions},
              {"mu", a.smoothing},
              {"T", a.iterations},
              {"epsilon", a.tolerance},
              {"seed", a.seed},
              {"learning_rate", a.learning_rate_scale},
              {"schedule", a.schedule == LearningRateSchedule::kConstant ? "constant" : "inverse_sqrt_dt"},
              {"trials_scale", a.trials_scale},
              {"n_trials", n_trials}};
  if (!dataset_name.empty()) doc["dataset_name"] = dataset_name;
  if (a.max_queries) doc["max_queries"] = *a.max_queries;
  if (a.target) doc["target"] = *a.target;
  if (random_query_budget) doc["random_query_budget"] = *random_query_budget;
  if (defense_gamma) doc["defense_gamma"] = *defense_gamma;
  if (max_targets) doc["max_targets"] = *max_targets;
  return doc;
}

void ExperimentConfig::validate() const {
  if (dataset.empty()) throw ConfigError("config needs a dataset");
  if (oracle.empty()) throw ConfigError("config needs an oracle");
  if (n_trials == 0) throw ConfigError("n_trials must be positive");
  if (attack_kind == AttackKind::kRandom && !random_query_budget) {
    throw ConfigError("the random attack needs random_query_budget");
  }
  try {
    attack.validate();
    if (defense_gamma) LowRankConfig{*defense_gamma}.validate();
  } catch (const InvalidParams& e) {
    throw ConfigError(e.what());
  }
}

OraclePtr make_oracle(std::string_view spec, int feature_dim) {
  const auto parts = split(spec, ':');
  const std::string& kind = parts.front();
  if (kind == "structural") {
    if (parts.size() != 3) throw ConfigError("expected structural:FEATURE:THRESHOLD");
    const auto feature = parse_structural_feature(parts[1]);
    if (!feature) throw ConfigError("unknown structural feature '" + parts[1] + "'");
    return std::shared_ptr<const HardLabelOracle>(
        structural_oracle(*feature, parse_u64(parts[2], "threshold")));
  }
  if (kind == "gin") {
    if (parts.size() < 2) throw ConfigError("expected gin:WEIGHTS.json");
    // Paths may themselves contain ':'.
    const std::string path(spec.substr(4));
    try {
      return std::make_shared<GinOracle>(std::make_shared<const GinWeights>(GinWeights::load(path)));
    } catch (const ShapeMismatch& e) {
      throw ConfigError(path + ": " + e.what());
    }
  }
  if (kind == "gin-random") {
    if (parts.size() < 2 || parts.size() > 4) throw ConfigError("expected gin-random:SEED[:H1,H2[:CLASSES]]");
    const auto seed = parse_u64(parts[1], "seed");
    std::vector<int> hidden = {16, 16};
    if (parts.size() >= 3) {
      hidden.clear();
      for (const auto& h : split(parts[2], ',')) hidden.push_back(static_cast<int>(parse_u64(h, "width")));
    }
    const int classes = parts.size() == 4 ? static_cast<int>(parse_u64(parts[3], "class count")) : 2;
    if (classes < 2 || std::find(hidden.begin(), hidden.end(), 0) != hidden.end()) {
      throw ConfigError("gin-random needs positive widths and at least two classes");
    }
    return std::make_shared<GinOracle>(
        std::make_shared<const GinWeights>(GinWeights::random(seed, feature_dim, hidden, classes)));
  }
  throw ConfigError("unknown oracle spec '" + std::string(spec) + "'");
}

DatasetBundle load_dataset(const ExperimentConfig& config, const HardLabelOracle* labeler) {
  if (fs::is_directory(config.dataset)) {
    const fs::path dir(config.dataset);
    std::string name = config.dataset_name;
    if (name.empty()) {
      fs::path normal = dir.lexically_normal();
      if (normal.filename().empty()) normal = normal.parent_path();
      name = normal.filename().string();
    }
    return load_tudataset(dir, name);
  }
  SyntheticSpec spec;
  try {
    spec = parse_synthetic_spec(config.dataset);
  } catch (const InvalidParams& e) {
    throw ConfigError("dataset '" + config.dataset + "' is neither a directory nor a synthetic spec: " +
                      e.what());
  }
  if (!labeler) return generate_synthetic(spec);
  const auto instance = std::shared_ptr<HardLabelOracle>(labeler->fresh());
  return generate_synthetic(spec, [instance](const Graph& g) { return instance->classify(g); });
}

std::vector<std::size_t> select_targets(const HardLabelOracle& oracle, const DatasetBundle& bundle,
                                        std::optional<std::size_t> limit) {
  const auto instance = oracle.fresh();
  std::vector<std::size_t> targets;
  for (std::size_t i = 0; i < bundle.graphs.size(); ++i) {
    if (limit && targets.size() >= *limit) break;
    const auto& label = bundle.graphs[i].label();
    if (label && instance->classify(bundle.graphs[i]) == *label) targets.push_back(i);
  }
  return targets;
}

std::uint64_t run_seed(std::uint64_t seed, std::size_t target, std::size_t trial) {
  return splitmix(splitmix(seed ^ splitmix(target)) + trial);
}

std::vector<AttackRecord> run_attacks(const ExperimentConfig& config, const HardLabelOracle& oracle,
                                      const DatasetBundle& bundle, const std::vector<std::size_t>& targets) {
  const std::size_t jobs = targets.size() * config.n_trials;
  std::vector<AttackRecord> records(jobs);
  std::size_t workers = config.workers ? config.workers : std::thread::hardware_concurrency();
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(jobs, 1));

  // BudgetedOracle shares the classifier and keeps its own ledger.
  const OraclePtr shared(oracle.fresh());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto work = [&] {
    for (std::size_t job = next++; job < jobs; job = next++) {
      const std::size_t index = targets[job / config.n_trials];
      const std::size_t trial = job % config.n_trials;
      try {
        const Graph& graph = bundle.graphs[index];
        const Label label = *graph.label();
        std::unique_ptr<HardLabelOracle> run_oracle =
            config.attack.max_queries ? with_budget(shared, *config.attack.max_queries) : shared->fresh();
        AttackConfig attack = config.attack;
        attack.seed = run_seed(config.attack.seed, index, trial);
        AttackResult result;
        if (config.attack_kind == AttackKind::kSignSgd) {
          result = run_attack(*run_oracle, graph, label, attack);
        } else {
          result = random_attack(*run_oracle, graph, AttackGoal{label, attack.target}, attack.budget,
                                 *config.random_query_budget, attack.seed);
        }
        records[job] = AttackRecord::from_result(index, trial, result);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };

  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return records;
}

double clean_accuracy(const HardLabelOracle& oracle, const DatasetBundle& bundle) {
  if (bundle.graphs.empty()) return 0.0;
  const auto instance = oracle.fresh();
  std::size_t correct = 0;
  for (const auto& g : bundle.graphs) {
    if (g.label() && instance->classify(g) == *g.label()) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(bundle.graphs.size());
}

std::vector<double> parse_range(std::string_view text) {
  const auto parts = split(text, ':');
  if (parts.size() != 3) throw ConfigError("expected a range a:b:step");
  double a = 0.0, b = 0.0, step = 0.0;
  try {
    a = std::stod(parts[0]);
    b = std::stod(parts[1]);
    step = std::stod(parts[2]);
  } catch (const std::logic_error&) {
    throw ConfigError("bad range '" + std::string(text) + "'");
  }
  if (!(step > 0.0) || b < a) throw ConfigError("range needs a <= b and a positive step");
  std::vector<double> values;
  for (std::size_t i = 0;; ++i) {
    const double v = std::round((a + static_cast<double>(i) * step) * 1e9) / 1e9;
    if (v > b + 1e-9) break;
    values.push_back(v);
  }
  return values;
}

namespace {

struct Setup {
  OraclePtr base;
  OraclePtr attacked;
  DatasetBundle bundle;
};

Setup prepare(const ExperimentConfig& config) {
  config.validate();
  Setup s;
  if (fs::is_directory(config.dataset)) {
    s.bundle = load_dataset(config, nullptr);
    int width = 1;
    if (!s.bundle.graphs.empty() && s.bundle.graphs.front().features()) {
      width = static_cast<int>(s.bundle.graphs.front().features()->cols());
    }
    s.base = make_oracle(config.oracle, width);
  } else {
    s.base = make_oracle(config.oracle, 1);
    s.bundle = load_dataset(config, s.base.get());
  }
  s.attacked = s.base;
  if (config.defense_gamma) {
    s.attacked = std::shared_ptr<const HardLabelOracle>(defended_oracle(s.base, LowRankConfig{*config.defense_gamma}));
  }
  return s;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config) {
  const Setup s = prepare(config);
  ExperimentReport report;
  report.config = config.to_json();
  const auto targets = select_targets(*s.attacked, s.bundle, config.max_targets);
  report.config["targets"] = targets.size();
  report.per_graph = run_attacks(config, *s.attacked, s.bundle, targets);
  report.aggregates = aggregate(report.per_graph);
  return report;
}

std::vector<BudgetRow> budget_sweep(const ExperimentConfig& config, const std::vector<double>& budgets) {
  const Setup s = prepare(config);
  const auto targets = select_targets(*s.attacked, s.bundle, config.max_targets);
  std::vector<BudgetRow> rows;
  for (double b : budgets) {
    ExperimentConfig c = config;
    c.attack.budget = b;
    c.validate();
    rows.push_back({b, aggregate(run_attacks(c, *s.attacked, s.bundle, targets))});
  }
  return rows;
}

std::vector<DefenseRow> defense_sweep(const ExperimentConfig& config, const std::vector<double>& gammas,
                                      bool with_attack) {
  ExperimentConfig undefended = config;
  undefended.defense_gamma.reset();
  const Setup s = prepare(undefended);
  std::vector<DefenseRow> rows;
  for (double gamma : gammas) {
    const OraclePtr defended(defended_oracle(s.base, LowRankConfig{gamma}));
    DefenseRow row{gamma, clean_accuracy(*defended, s.bundle), std::nullopt};
    if (with_attack) {
      const auto targets = select_targets(*defended, s.bundle, config.max_targets);
      row.sr = aggregate(run_attacks(config, *defended, s.bundle, targets)).sr;
    }
    rows.push_back(row);
  }
  return rows;
}

void write_outputs(const ExperimentReport& report, const ExperimentConfig& config) {
  if (config.out_json) {
    std::ofstream out(*config.out_json);
    if (!out) throw ConfigError("cannot write " + config.out_json->string());
    out << report.to_json().dump(2) << '\n';
  }
  if (config.out_csv) {
    std::ofstream out(*config.out_csv);
    if (!out) throw ConfigError("cannot write " + config.out_csv->string());
    report.write_csv(out);
  }
  if (config.trace_dir) report.write_traces(*config.trace_dir);
}

}  // namespace hlgraph
