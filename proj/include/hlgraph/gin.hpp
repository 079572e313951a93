#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "hlgraph/graph.hpp"
#include "hlgraph/oracle.hpp"

namespace hlgraph {

// One message-passing layer: h' = ReLU(W ((1 + eps) h_v + sum_{u in N(v)} h_u) + b).
struct GinLayer {
  Eigen::MatrixXd weight;  // out_dim x in_dim
  Eigen::VectorXd bias;    // out_dim
  double epsilon = 0.0;
};

struct LinearMap {
  Eigen::MatrixXd weight;  // classes x in_dim
  Eigen::VectorXd bias;    // classes
};

// Inference-only weights of a sum-pooling GIN graph classifier.
//
// `readout` holds either one map per message-passing layer, or one more than
// that, in which case readout[0] scores the pooled input features.
struct GinWeights {
  std::vector<GinLayer> layers;
  std::vector<LinearMap> readout;
  int classes = 2;
  int feature_dim = 1;

  bool reads_input_layer() const { return readout.size() == layers.size() + 1; }

  // Throws ShapeMismatch when any dimension fails to chain.
  void validate() const;

  static GinWeights from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;
  static GinWeights load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  // Gaussian weights scaled by 1/sqrt(fan_in), fixed by the seed.
  static GinWeights random(std::uint64_t seed, int feature_dim, const std::vector<int>& hidden_dims,
                           int classes, bool read_input_layer = true);
};

// Features used for a graph: its own when present, otherwise all ones.
Eigen::MatrixXd gin_input_features(const GinWeights& weights, const Graph& graph);

Eigen::VectorXd gin_logits(const GinWeights& weights, const Graph& graph);

// Argmax of the softmax output; equal scores resolve to the smallest class index.
Label gin_forward(const GinWeights& weights, const Graph& graph);

class GinOracle final : public HardLabelOracle {
 public:
  explicit GinOracle(std::shared_ptr<const GinWeights> weights);

  const GinWeights& weights() const { return *weights_; }

  std::unique_ptr<HardLabelOracle> fresh() const override;

 protected:
  Label predict(const Graph& graph) const override { return gin_forward(*weights_, graph); }

 private:
  std::shared_ptr<const GinWeights> weights_;
};

}  // namespace hlgraph
