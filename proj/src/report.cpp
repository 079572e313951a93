#include "hlgraph/report.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>

#include "hlgraph/errors.hpp"

namespace hlgraph {

using nlohmann::json;

AttackRecord AttackRecord::from_result(std::size_t id, std::size_t trial, const AttackResult& result) {
  AttackRecord r;
  r.id = id;
  r.trial = trial;
  r.success = result.success;
  if (result.success) {
    r.flips_added = result.flips.added.size();
    r.flips_removed = result.flips.removed.size();
    r.rate = result.rate;
  }
  r.queries = result.queries;
  r.time_s = result.wall_time_s;
  r.found_in = result.found_in;
  r.gradient_norms = result.gradient_norm_trace;
  r.p_trace = result.p_trace;
  return r;
}

Aggregates aggregate(const std::vector<AttackRecord>& records) {
  Aggregates a;
  a.runs = records.size();
  if (records.empty()) return a;
  double flips = 0.0, added = 0.0, removed = 0.0, queries = 0.0, time = 0.0;
  for (const auto& r : records) {
    queries += static_cast<double>(r.queries.total());
    time += r.time_s;
    if (!r.success) continue;
    ++a.successes;
    flips += static_cast<double>(r.flips());
    added += static_cast<double>(r.flips_added);
    removed += static_cast<double>(r.flips_removed);
  }
  const auto runs = static_cast<double>(a.runs);
  a.sr = static_cast<double>(a.successes) / runs;
  a.aq = queries / runs;
  a.at = time / runs;
  if (a.successes > 0) {
    const auto s = static_cast<double>(a.successes);
    a.ap = flips / s;
    a.avg_added = added / s;
    a.avg_removed = removed / s;
  }
  return a;
}

namespace {

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> optional_double(const json& v) {
  if (v.is_null()) return std::nullopt;
  return v.get<double>();
}

json aggregates_json(const Aggregates& a) {
  return {{"SR", a.sr},
          {"AP", optional_json(a.ap)},
          {"AQ", a.aq},
          {"AT", a.at},
          {"avg_added", optional_json(a.avg_added)},
          {"avg_removed", optional_json(a.avg_removed)},
          {"runs", a.runs},
          {"successes", a.successes}};
}

Aggregates aggregates_from_json(const json& j) {
  Aggregates a;
  a.sr = j.at("SR").get<double>();
  a.ap = optional_double(j.at("AP"));
  a.aq = j.at("AQ").get<double>();
  a.at = j.at("AT").get<double>();
  a.avg_added = optional_double(j.at("avg_added"));
  a.avg_removed = optional_double(j.at("avg_removed"));
  a.runs = j.value("runs", std::size_t{0});
  a.successes = j.value("successes", std::size_t{0});
  return a;
}

std::optional<ComponentKind> parse_component_kind(const json& v) {
  if (v.is_null()) return std::nullopt;
  const auto s = v.get<std::string>();
  for (auto kind : {ComponentKind::kSupernode, ComponentKind::kSuperlink, ComponentKind::kWholeGraph}) {
    if (s == to_string(kind)) return kind;
  }
  throw ConfigError("unknown component kind '" + s + "'");
}

// Shortest round-trip text for a double, so equal values print identically.
std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

}  // namespace

json ExperimentReport::to_json() const {
  json rows = json::array();
  for (const auto& r : per_graph) {
    rows.push_back({{"id", r.id},
                    {"trial", r.trial},
                    {"success", r.success},
                    {"flips_added", r.flips_added},
                    {"flips_removed", r.flips_removed},
                    {"rate", r.rate},
                    {"queries",
                     {{"total", r.queries.total()},
                      {"cgs", r.queries.cgs},
                      {"binary_search", r.queries.binary_search},
                      {"qegc", r.queries.qegc},
                      {"other", r.queries.other}}},
                    {"time_s", r.time_s},
                    {"found_in", r.found_in ? json(std::string(to_string(*r.found_in))) : json(nullptr)}});
  }
  json doc = {{"config", config}, {"per_graph", rows}, {"aggregates", aggregates_json(aggregates)}};
  if (!defense.empty()) {
    json d = json::array();
    for (const auto& row : defense) {
      d.push_back({{"gamma", row.gamma}, {"clean_accuracy", row.clean_accuracy}, {"SR", optional_json(row.sr)}});
    }
    doc["defense_sweep"] = d;
  }
  if (!budget_sweep.empty()) {
    json b = json::array();
    for (const auto& row : budget_sweep) {
      json entry = aggregates_json(row.aggregates);
      entry["budget"] = row.budget;
      b.push_back(entry);
    }
    doc["budget_sweep"] = b;
  }
  return doc;
}

ExperimentReport ExperimentReport::from_json(const json& doc) {
  try {
    ExperimentReport report;
    report.config = doc.value("config", json::object());
    for (const auto& row : doc.at("per_graph")) {
      AttackRecord r;
      r.id = row.at("id").get<std::size_t>();
      r.trial = row.value("trial", std::size_t{0});
      r.success = row.at("success").get<bool>();
      r.flips_added = row.at("flips_added").get<std::size_t>();
      r.flips_removed = row.at("flips_removed").get<std::size_t>();
      r.rate = row.at("rate").get<double>();
      const auto& q = row.at("queries");
      r.queries.cgs = q.at("cgs").get<std::uint64_t>();
      r.queries.binary_search = q.at("binary_search").get<std::uint64_t>();
      r.queries.qegc = q.at("qegc").get<std::uint64_t>();
      r.queries.other = q.value("other", std::uint64_t{0});
      if (r.queries.total() != q.at("total").get<std::uint64_t>()) {
        throw ConfigError("per-phase query counts do not add up to the total for graph " +
                          std::to_string(r.id));
      }
      r.time_s = row.at("time_s").get<double>();
      r.found_in = parse_component_kind(row.at("found_in"));
      report.per_graph.push_back(std::move(r));
    }
    report.aggregates = aggregates_from_json(doc.at("aggregates"));
    if (doc.contains("defense_sweep")) {
      for (const auto& row : doc["defense_sweep"]) {
        report.defense.push_back({row.at("gamma").get<double>(), row.at("clean_accuracy").get<double>(),
                                  optional_double(row.at("SR"))});
      }
    }
    if (doc.contains("budget_sweep")) {
      for (const auto& row : doc["budget_sweep"]) {
        report.budget_sweep.push_back({row.at("budget").get<double>(), aggregates_from_json(row)});
      }
    }
    return report;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed report: ") + e.what());
  }
}

void ExperimentReport::write_csv(std::ostream& out) const {
  out << "id,trial,success,flips_added,flips_removed,rate,queries_total,queries_cgs,"
         "queries_binary_search,queries_qegc,queries_other,found_in,time_s\n";
  for (const auto& r : per_graph) {
    out << r.id << ',' << r.trial << ',' << (r.success ? 1 : 0) << ',' << r.flips_added << ','
        << r.flips_removed << ',' << num(r.rate) << ',' << r.queries.total() << ',' << r.queries.cgs << ','
        << r.queries.binary_search << ',' << r.queries.qegc << ',' << r.queries.other << ','
        << (r.found_in ? to_string(*r.found_in) : "") << ',' << num(r.time_s) << '\n';
  }
}

void ExperimentReport::write_defense_csv(std::ostream& out) const {
  out << "gamma,clean_accuracy,SR\n";
  for (const auto& row : defense) {
    out << num(row.gamma) << ',' << num(row.clean_accuracy) << ',' << opt_num(row.sr) << '\n';
  }
}

void ExperimentReport::write_budget_csv(std::ostream& out) const {
  out << "budget,SR,AP,AQ,avg_added,avg_removed\n";
  for (const auto& row : budget_sweep) {
    const auto& a = row.aggregates;
    out << num(row.budget) << ',' << num(a.sr) << ',' << opt_num(a.ap) << ',' << num(a.aq) << ','
        << opt_num(a.avg_added) << ',' << opt_num(a.avg_removed) << '\n';
  }
}

std::vector<std::filesystem::path> ExperimentReport::write_traces(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  for (const auto& r : per_graph) {
    const auto path = dir / ("trace_" + std::to_string(r.id) + "_" + std::to_string(r.trial) + ".csv");
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << "iteration,gradient_norm,p\n";
    const std::size_t rows = std::max(r.gradient_norms.size(), r.p_trace.size());
    for (std::size_t t = 0; t < rows; ++t) {
      out << t << ',' << (t < r.gradient_norms.size() ? num(r.gradient_norms[t]) : "") << ','
          << (t < r.p_trace.size() ? num(r.p_trace[t]) : "") << '\n';
    }
    written.push_back(path);
  }
  return written;
}

}  // namespace hlgraph
