#include "hlgraph/gin.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include "hlgraph/errors.hpp"

namespace hlgraph {

namespace {

using nlohmann::json;

Eigen::MatrixXd matrix_from_json(const json& rows, const char* what) {
  if (!rows.is_array() || rows.empty() || !rows.front().is_array()) {
    throw ShapeMismatch(std::string(what) + " must be a non-empty array of rows");
  }
  const auto n_rows = static_cast<Eigen::Index>(rows.size());
  const auto n_cols = static_cast<Eigen::Index>(rows.front().size());
  Eigen::MatrixXd m(n_rows, n_cols);
  for (Eigen::Index r = 0; r < n_rows; ++r) {
    const auto& row = rows[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n_cols) {
      throw ShapeMismatch(std::string(what) + " has ragged rows");
    }
    for (Eigen::Index c = 0; c < n_cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

Eigen::VectorXd vector_from_json(const json& values, const char* what) {
  if (!values.is_array()) throw ShapeMismatch(std::string(what) + " must be an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) v(static_cast<Eigen::Index>(i)) = values[i].get<double>();
  return v;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

std::string shape(const Eigen::MatrixXd& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

void GinWeights::validate() const {
  if (classes < 1) throw ShapeMismatch("GIN needs at least one class");
  if (feature_dim < 1) throw ShapeMismatch("GIN feature_dim must be positive");
  if (readout.size() != layers.size() && readout.size() != layers.size() + 1) {
    throw ShapeMismatch("GIN readout count must equal the layer count or exceed it by one");
  }
  Eigen::Index in_dim = feature_dim;
  std::vector<Eigen::Index> dims{in_dim};
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const auto& layer = layers[k];
    if (layer.weight.cols() != in_dim) {
      throw ShapeMismatch("layer " + std::to_string(k) + " weight is " + shape(layer.weight) +
                          " but its input dimension is " + std::to_string(in_dim));
    }
    if (layer.bias.size() != layer.weight.rows()) {
      throw ShapeMismatch("layer " + std::to_string(k) + " bias length mismatch");
    }
    in_dim = layer.weight.rows();
    dims.push_back(in_dim);
  }
  const std::size_t offset = reads_input_layer() ? 0 : 1;
  for (std::size_t r = 0; r < readout.size(); ++r) {
    const auto& map = readout[r];
    const Eigen::Index expected = dims[r + offset];
    if (map.weight.rows() != classes || map.weight.cols() != expected) {
      throw ShapeMismatch("readout " + std::to_string(r) + " weight is " + shape(map.weight) +
                          ", expected " + std::to_string(classes) + "x" + std::to_string(expected));
    }
    if (map.bias.size() != classes) {
      throw ShapeMismatch("readout " + std::to_string(r) + " bias length mismatch");
    }
  }
}

GinWeights GinWeights::from_json(const nlohmann::json& doc) {
  GinWeights w;
  try {
    w.classes = doc.at("classes").get<int>();
    w.feature_dim = doc.at("feature_dim").get<int>();
    for (const auto& layer : doc.at("layers")) {
      w.layers.push_back({matrix_from_json(layer.at("W"), "layer W"),
                          vector_from_json(layer.at("b"), "layer b"),
                          layer.value("epsilon", 0.0)});
    }
    for (const auto& map : doc.at("readout")) {
      w.readout.push_back(
          {matrix_from_json(map.at("W"), "readout W"), vector_from_json(map.at("b"), "readout b")});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ShapeMismatch(std::string("malformed GIN weights: ") + e.what());
  }
  w.validate();
  return w;
}

nlohmann::json GinWeights::to_json() const {
  json doc;
  doc["classes"] = classes;
  doc["feature_dim"] = feature_dim;
  doc["layers"] = json::array();
  for (const auto& layer : layers) {
    doc["layers"].push_back(
        {{"W", matrix_to_json(layer.weight)}, {"b", vector_to_json(layer.bias)}, {"epsilon", layer.epsilon}});
  }
  doc["readout"] = json::array();
  for (const auto& map : readout) {
    doc["readout"].push_back({{"W", matrix_to_json(map.weight)}, {"b", vector_to_json(map.bias)}});
  }
  return doc;
}

GinWeights GinWeights::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open GIN weights file " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ShapeMismatch("cannot parse " + path.string() + ": " + e.what());
  }
  return from_json(doc);
}

void GinWeights::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write GIN weights file " + path.string());
  out << to_json().dump(2) << '\n';
}

GinWeights GinWeights::random(std::uint64_t seed, int feature_dim, const std::vector<int>& hidden_dims,
                              int classes, bool read_input_layer) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto gaussian = [&](Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    const double scale = 1.0 / std::sqrt(static_cast<double>(cols));
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = scale * normal(rng);
    }
    return m;
  };

  GinWeights w;
  w.classes = classes;
  w.feature_dim = feature_dim;
  int in_dim = feature_dim;
  if (read_input_layer) {
    w.readout.push_back({gaussian(classes, in_dim), gaussian(classes, 1).col(0)});
  }
  for (int out_dim : hidden_dims) {
    w.layers.push_back({gaussian(out_dim, in_dim), gaussian(out_dim, 1).col(0), 0.0});
    w.readout.push_back({gaussian(classes, out_dim), gaussian(classes, 1).col(0)});
    in_dim = out_dim;
  }
  w.validate();
  return w;
}

Eigen::MatrixXd gin_input_features(const GinWeights& weights, const Graph& graph) {
  const auto n = static_cast<Eigen::Index>(graph.n_nodes());
  if (!graph.features()) return Eigen::MatrixXd::Ones(n, weights.feature_dim);
  const auto& x = *graph.features();
  if (x.cols() != weights.feature_dim) {
    throw ShapeMismatch("graph features have width " + std::to_string(x.cols()) +
                        " but the model expects " + std::to_string(weights.feature_dim));
  }
  return x;
}

Eigen::VectorXd gin_logits(const GinWeights& weights, const Graph& graph) {
  Eigen::MatrixXd h = gin_input_features(weights, graph);  // one row per node
  const auto adj = graph.adjacency_lists();
  Eigen::VectorXd logits = Eigen::VectorXd::Zero(weights.classes);

  std::size_t next_readout = 0;
  auto read = [&](const Eigen::MatrixXd& embeddings) {
    const auto& map = weights.readout[next_readout++];
    const Eigen::VectorXd pooled = embeddings.colwise().sum().transpose();
    logits += map.weight * pooled + map.bias;
  };

  if (weights.reads_input_layer()) read(h);
  for (const auto& layer : weights.layers) {
    Eigen::MatrixXd aggregated = (1.0 + layer.epsilon) * h;
    for (std::size_t v = 0; v < adj.size(); ++v) {
      for (std::size_t u : adj[v]) {
        aggregated.row(static_cast<Eigen::Index>(v)) += h.row(static_cast<Eigen::Index>(u));
      }
    }
    Eigen::MatrixXd next = (aggregated * layer.weight.transpose()).rowwise() + layer.bias.transpose();
    h = next.cwiseMax(0.0);
    read(h);
  }
  return logits;
}

Label gin_forward(const GinWeights& weights, const Graph& graph) {
  const Eigen::VectorXd logits = gin_logits(weights, graph);
  // softmax is monotone, so the argmax of the logits is the argmax of the output.
  Eigen::Index best = 0;
  for (Eigen::Index c = 1; c < logits.size(); ++c) {
    if (logits(c) > logits(best)) best = c;
  }
  return static_cast<Label>(best);
}

GinOracle::GinOracle(std::shared_ptr<const GinWeights> weights) : weights_(std::move(weights)) {
  if (!weights_) throw InvalidParams("GinOracle needs weights");
  weights_->validate();
}

std::unique_ptr<HardLabelOracle> GinOracle::fresh() const {
  return std::make_unique<GinOracle>(weights_);
}

}  // namespace hlgraph
