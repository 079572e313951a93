#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "hlgraph/errors.hpp"
#include "hlgraph/experiment.hpp"
#include "hlgraph/report.hpp"

using nlohmann::json;

namespace {

// Options shared by every subcommand that runs attacks. Only options given on
// the command line override the config file.
struct CommonOptions {
  std::string config_path;
  std::string dataset, dataset_name, oracle, strategy, schedule;
  std::optional<double> budget, mu, epsilon, learning_rate, defense_gamma;
  std::optional<std::size_t> q, t, n_trials, workers, max_targets, trials_scale;
  std::optional<std::uint64_t> seed, max_queries;
  std::optional<int> target;
  std::string out, csv, trace_dir;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "JSON experiment config");
    app->add_option("--dataset", dataset, "TUDataset directory or synthetic spec (er:N:P:COUNT:SEED, ...)");
    app->add_option("--dataset-name", dataset_name, "TUDataset file prefix");
    app->add_option("--oracle", oracle,
                    "gin:weights.json | gin-random:SEED[:H1,H2[:C]] | structural:FEATURE:THRESHOLD");
    app->add_option("--budget", budget, "maximum perturbation rate b");
    app->add_option("--strategy", strategy, "coarse search order: I, II or III");
    app->add_option("--Q", q, "sign-gradient directions per step");
    app->add_option("--mu", mu, "smoothing radius");
    app->add_option("--T", t, "signSGD iterations");
    app->add_option("--epsilon", epsilon, "binary-search tolerance");
    app->add_option("--lr", learning_rate, "learning-rate scale");
    app->add_option("--schedule", schedule, "constant | inverse_sqrt_dt");
    app->add_option("--seed", seed, "experiment seed");
    app->add_option("--n-trials", n_trials, "runs per target");
    app->add_option("--trials-scale", trials_scale, "coarse-search trials per node");
    app->add_option("--max-queries", max_queries, "hard query cap per run");
    app->add_option("--target", target, "target label (targeted attack)");
    app->add_option("--defense-gamma", defense_gamma, "attack a low-rank defended oracle");
    app->add_option("--workers", workers, "worker threads (0: all cores)");
    app->add_option("--max-targets", max_targets, "attack at most this many targets");
    app->add_option("--out", out, "JSON report path");
    app->add_option("--csv", csv, "CSV output path");
    app->add_option("--trace-dir", trace_dir, "directory for per-graph gradient traces");
  }

  json to_config() const {
    json doc = json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw hlgraph::ConfigError("cannot open config " + config_path);
      try {
        in >> doc;
      } catch (const json::exception& e) {
        throw hlgraph::ConfigError(config_path + ": " + e.what());
      }
    }
    auto set = [&doc](const char* key, const auto& value) {
      if (value) doc[key] = *value;
    };
    auto set_string = [&doc](const char* key, const std::string& value) {
      if (!value.empty()) doc[key] = value;
    };
    set_string("dataset", dataset);
    set_string("dataset_name", dataset_name);
    set_string("oracle", oracle);
    set_string("strategy", strategy);
    set_string("schedule", schedule);
    set("budget", budget);
    set("mu", mu);
    set("epsilon", epsilon);
    set("learning_rate", learning_rate);
    set("defense_gamma", defense_gamma);
    set("Q", q);
    set("T", t);
    set("n_trials", n_trials);
    set("workers", workers);
    set("max_targets", max_targets);
    set("trials_scale", trials_scale);
    set("seed", seed);
    set("max_queries", max_queries);
    set("target", target);
    set_string("out_json", out);
    set_string("out_csv", csv);
    set_string("trace_dir", trace_dir);
    return doc;
  }
};

void print_aggregates(const hlgraph::Aggregates& a) {
  auto opt = [](const std::optional<double>& v) { return v ? std::to_string(*v) : std::string("n/a"); };
  std::cout << "runs " << a.runs << ", successes " << a.successes << '\n'
            << "SR " << a.sr << "  AP " << opt(a.ap) << "  AQ " << a.aq << "  AT " << a.at << "s\n"
            << "avg added " << opt(a.avg_added) << "  avg removed " << opt(a.avg_removed) << '\n';
}

void write_text(const std::string& path, const auto& writer) {
  if (path.empty()) {
    writer(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw hlgraph::ConfigError("cannot write " + path);
  writer(out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hard-label structural attacks on graph classifiers"};
  app.require_subcommand(1);

  CommonOptions attack_opts;
  auto* attack = app.add_subcommand("attack", "run the signSGD attack on every correctly classified graph");
  attack_opts.attach(attack);

  CommonOptions random_opts;
  std::uint64_t query_budget = 0;
  auto* random = app.add_subcommand("baseline-random", "random-perturbation baseline");
  random_opts.attach(random);
  random->add_option("--query-budget", query_budget, "queries per run")->required();

  CommonOptions defend_opts;
  std::string gamma_range = "0.05:1.0:0.05";
  bool clean_only = false;
  auto* defend = app.add_subcommand("defend", "clean accuracy and SR of the low-rank defense over gamma");
  defend_opts.attach(defend);
  defend->add_option("--gamma-sweep", gamma_range, "gamma range a:b:step");
  defend->add_flag("--clean-only", clean_only, "skip the attacks, report clean accuracy only");

  CommonOptions sweep_opts;
  std::string budget_range = "0.01:0.20:0.01";
  auto* sweep = app.add_subcommand("sweep-budget", "SR and AP of the attack over a range of budgets");
  sweep_opts.attach(sweep);
  sweep->add_option("--budgets", budget_range, "budget range a:b:step");

  std::string report_path;
  auto* eval = app.add_subcommand("eval", "recompute and print the metrics of a saved report");
  eval->add_option("--report", report_path, "JSON report")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (attack->parsed() || random->parsed()) {
      json doc = (attack->parsed() ? attack_opts : random_opts).to_config();
      if (random->parsed()) {
        doc["attack"] = "random";
        doc["random_query_budget"] = query_budget;
      }
      const auto config = hlgraph::ExperimentConfig::from_json(doc);
      const auto report = hlgraph::run_experiment(config);
      hlgraph::write_outputs(report, config);
      print_aggregates(report.aggregates);
    } else if (defend->parsed()) {
      const auto config = hlgraph::ExperimentConfig::from_json(defend_opts.to_config());
      hlgraph::ExperimentReport report;
      report.config = config.to_json();
      report.defense = hlgraph::defense_sweep(config, hlgraph::parse_range(gamma_range), !clean_only);
      if (config.out_json) hlgraph::write_outputs(report, config);
      write_text(defend_opts.csv, [&](std::ostream& out) { report.write_defense_csv(out); });
    } else if (sweep->parsed()) {
      const auto config = hlgraph::ExperimentConfig::from_json(sweep_opts.to_config());
      hlgraph::ExperimentReport report;
      report.config = config.to_json();
      report.budget_sweep = hlgraph::budget_sweep(config, hlgraph::parse_range(budget_range));
      if (config.out_json) hlgraph::write_outputs(report, config);
      write_text(sweep_opts.csv, [&](std::ostream& out) { report.write_budget_csv(out); });
    } else if (eval->parsed()) {
      std::ifstream in(report_path);
      json doc;
      try {
        in >> doc;
      } catch (const json::exception& e) {
        throw hlgraph::ConfigError(report_path + ": " + e.what());
      }
      const auto report = hlgraph::ExperimentReport::from_json(doc);
      const auto recomputed = hlgraph::aggregate(report.per_graph);
      print_aggregates(recomputed);
      if (recomputed.runs != report.aggregates.runs && report.aggregates.runs != 0) {
        std::cerr << "warning: stored aggregates cover " << report.aggregates.runs << " runs\n";
      }
    }
  } catch (const hlgraph::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
