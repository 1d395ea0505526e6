#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "docgraph/doc_model.hpp"
#include "docgraph/encoder.hpp"
#include "docgraph/gnn.hpp"
#include "docgraph/metrics.hpp"
#include "docgraph/tensor.hpp"

namespace docgraph {

/// Segment labels that are not entities; their tokens are tagged O.
inline constexpr const char* kOutsideLabel = "other";

/// Tag vocabulary: "O" then B-/I- per entity label, labels sorted.
class TagScheme {
 public:
  explicit TagScheme(const std::vector<std::string>& label_set);

  const std::vector<std::string>& tags() const { return tags_; }
  const std::vector<std::string>& entity_labels() const { return labels_; }
  int size() const { return static_cast<int>(tags_.size()); }
  int id(const std::string& tag) const;
  const std::string& tag(int id) const { return tags_.at(static_cast<std::size_t>(id)); }

 private:
  std::vector<std::string> labels_;
  std::vector<std::string> tags_;
};

/// Token-level BIO tags for a document in reading order (segment order,
/// then token order): first token B-X, the rest I-X, unlabeled or "other" O.
std::vector<std::string> bio_tags(const Document& doc);

/// Token to segment id, in the same order as bio_tags.
std::vector<int> token_alignment(const Document& doc);

/// Per-token h^L from the hashing embedder.
Tensor token_embeddings(const Document& doc, const TextEmbedder& embedder);

/// Per-token h^L from an external file; keys are token_key(segment, index).
Tensor token_embeddings(const Document& doc, const ExternalEmbeddings& external);

struct FusedTokenMatrix {
  Tensor features;             // tokens x (D_L + D_h)
  std::vector<int> alignment;  // token -> segment id
  int text_dim = 0;
  int graph_dim = 0;
};

/// h^C_token = [h^L_token ; h^G_segment(token)].
FusedTokenMatrix fuse(const Tensor& tokens_hl, const std::vector<int>& alignment, const Tensor& hg);

/// One document prepared for the IE head.
struct IeExample {
  std::string doc_id;
  Tensor h_l;                  // tokens x D_L
  std::vector<int> alignment;  // token -> segment
  std::vector<int> tags;       // tag ids
  std::optional<Tensor> h_g;   // frozen graph embeddings, fused arm only
  std::optional<NodeFeatures> node_inputs;  // needed for joint fine-tuning
};

struct IeConfig {
  int epochs = 20;
  double lr = 5e-5;
  int batch_size = 6;
  std::uint64_t seed = 0;
  bool joint_finetune = false;
  double gnn_lr = 1e-3;  // used only when joint_finetune is set

  void validate() const;
};

/// Linear layer + softmax over tags. Weight rows [0, text_dim) read h^L,
/// the rest read h^G and start at zero.
class IeHead {
 public:
  IeHead() = default;
  IeHead(int text_dim, int graph_dim, int tag_count, std::uint64_t seed);

  int text_dim() const { return text_dim_; }
  int graph_dim() const { return graph_dim_; }
  int tag_count() const { return tag_count_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  Tensor logits(const Tensor& features) const;
  std::vector<int> predict(const Tensor& features) const;

  static constexpr const char* kWeight = "ie.w";
  static constexpr const char* kBias = "ie.b";

 private:
  int text_dim_ = 0;
  int graph_dim_ = 0;
  int tag_count_ = 0;
  ParamStore params_;
};

struct IeEpoch {
  int epoch = 0;
  double loss = 0;            // mean token cross-entropy
  double train_accuracy = 0;  // token accuracy on the training set after the epoch
  EntityMetrics eval;         // on the evaluation set after the epoch
};

struct IeTrainResult {
  IeHead head;
  std::vector<IeEpoch> history;
};

/// Trains the head on `train`. With `gnn` set and cfg.joint_finetune, graph
/// embeddings are recomputed on the tape and the GNN is updated too;
/// otherwise the GNN (and any h_g) is read-only.
IeTrainResult train_ie_head(const std::vector<IeExample>& train, const std::vector<IeExample>& eval,
                            const TagScheme& scheme, const IeConfig& cfg, GnnModel* gnn = nullptr);

/// Features the head reads for one example: h^L alone or fused with h^G.
Tensor example_features(const IeExample& ex, const GnnModel* gnn = nullptr);

EntityMetrics evaluate_head(const IeHead& head, const std::vector<IeExample>& examples, const TagScheme& scheme,
                            const GnnModel* gnn = nullptr);

}  // namespace docgraph
