#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "docgraph/doc_model.hpp"
#include "docgraph/encoder.hpp"
#include "docgraph/geometry.hpp"
#include "docgraph/graph_builder.hpp"
#include "docgraph/tensor.hpp"

namespace docgraph {

struct GnnConfig {
  int text_dim = 64;
  int size_dim = 8;
  int hidden_dim = 64;
  int layers = 2;
  std::uint64_t hash_seed = 42;

  int input_dim() const { return text_dim + size_dim; }
};

/// Weights of one GraphSage layer, stored input-major (D_in x D_out) so a
/// node matrix multiplies on the left.
struct SageLayer {
  Tensor w_self;
  Tensor w_neigh;
  Tensor bias;  // 1 x D_out
};

/// h' = ReLU(H W_self + mean_{v in N(u)} h_v W_neigh + b). Nodes without
/// neighbours get a zero neighbour term.
Tensor sage_forward(const Tensor& h, const std::vector<std::vector<int>>& adjacency, const SageLayer& layer);

/// Linear map of the dot product: w * <h_u, h_v> + b.
double distance_head(std::span<const double> h_u, std::span<const double> h_v, double w, double b);

/// softmax((h_u * h_v) W) over the eight sectors; W is D_h x 8.
std::array<double, kSectorCount> direction_head(std::span<const double> h_u, std::span<const double> h_v,
                                                const Tensor& w);

struct Pair {
  int u = 0;
  int v = 0;
  double y_e = 0;  // target e_dis
  int y_d = 0;     // target sector
  double r = 0;    // normalised distance, weight is (1 - r)
};

using PairBatch = std::vector<Pair>;

struct PairPrediction {
  double distance = 0;
  std::array<double, kSectorCount> direction{};
};

struct LossParts {
  double total = 0;
  double mse = 0;  // sum of (1 - r) * squared error
  double ce = 0;   // sum of (1 - r) * cross-entropy
};

/// sum over pairs of [lambda * (yhat_e - y_e)^2 + (1 - lambda) * -ln yhat_d[y_d]] * (1 - r).
LossParts joint_loss(const PairBatch& batch, const std::vector<PairPrediction>& preds, double lambda);

PairBatch pairs_from_graph(const DocumentGraph& graph);

/// Fixed per-document inputs: hashed text block and normalised [w, h].
struct NodeFeatures {
  Tensor text;  // N x text_dim
  Tensor size;  // N x 2
  std::vector<std::vector<int>> adjacency;
};

NodeFeatures node_features(const Document& doc, const DocumentGraph& graph, const TextEmbedder& embedder);

class GnnModel {
 public:
  GnnModel() = default;
  GnnModel(const GnnConfig& config, std::uint64_t seed);
  GnnModel(const GnnConfig& config, ParamStore params);

  const GnnConfig& config() const { return config_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }
  TextEmbedder text_embedder() const { return TextEmbedder(config_.text_dim, config_.hash_seed); }

  SageLayer layer(int l) const;

  /// Records the node encoder and GraphSage stack; returns the N x D_h node matrix.
  Var forward(Tape& tape, const NodeFeatures& features);

  struct PairOutputs {
    Var distance;  // P x 1
    Var logits;    // P x 8
  };
  PairOutputs predict_pairs(Tape& tape, Var nodes, const PairBatch& batch);

  /// Records the weighted joint loss over `batch` and returns it with its parts.
  Var loss(Tape& tape, const NodeFeatures& features, const PairBatch& batch, double lambda, LossParts* parts,
           std::vector<int>* predicted_dirs = nullptr);

  /// No-grad forward; rows are h^G per node.
  Tensor embed(const NodeFeatures& features) const;

  static std::string self_name(int l) { return "sage." + std::to_string(l) + ".w_self"; }
  static std::string neigh_name(int l) { return "sage." + std::to_string(l) + ".w_neigh"; }
  static std::string bias_name(int l) { return "sage." + std::to_string(l) + ".bias"; }
  static constexpr const char* kSizeProj = "encoder.size_proj";
  static constexpr const char* kDistW = "head.distance.w";
  static constexpr const char* kDistB = "head.distance.b";
  static constexpr const char* kDirW = "head.direction.w";

 private:
  GnnConfig config_;
  ParamStore params_;
};

/// Glorot-uniform initialisation: U(-a, a), a = sqrt(6 / (fan_in + fan_out)).
Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, std::uint64_t seed, const std::string& name);

class Adam {
 public:
  explicit Adam(double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  /// Applies one update to every named parameter that has a gradient.
  void step(ParamStore& params, const std::vector<std::string>& names);
  void step(ParamStore& params) { step(params, params.names()); }

  double lr() const { return lr_; }

 private:
  struct Moments {
    std::vector<double> m, v;
    long long t = 0;
  };
  double lr_, beta1_, beta2_, eps_;
  std::map<std::string, Moments> state_;
};

}  // namespace docgraph
