#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "docgraph/gnn.hpp"

namespace docgraph {

struct TrainConfig {
  int epochs = 20;
  double lr = 1e-3;
  int batch_size = 6;  // documents per optimiser step
  double lambda = 0.5;
  std::uint64_t seed = 0;
  GnnConfig gnn;
  int extra_pair_count = 0;  // random non-edge pairs added per document
  bool loss_mean = false;    // divide the step loss by its pair count

  void validate() const;
};

struct EpochStats {
  int epoch = 0;
  long long pairs = 0;
  double joint = 0;  // per-pair mean of the weighted joint loss
  double mse = 0;    // per-pair mean of (1 - r) * squared error
  double ce = 0;     // per-pair mean of (1 - r) * cross-entropy
  double direction_accuracy = 0;
};

using LossHistory = std::vector<EpochStats>;

struct GraphDoc {
  Document doc;
  DocumentGraph graph;
};

std::vector<GraphDoc> build_corpus_graphs(const std::vector<Document>& docs);

struct LinkTrainResult {
  GnnModel model;
  LossHistory history;
};

/// Link-prediction training. Each epoch shuffles documents, groups them into
/// batches of `batch_size`, accumulates gradients of the joint loss over each
/// batch and takes one Adam step. Batches without pairs are skipped.
LinkTrainResult train_link_prediction(const std::vector<GraphDoc>& corpus, const TrainConfig& cfg);

/// Fraction of directed edges whose arg-max sector is correct.
double direction_accuracy(const GnnModel& model, const std::vector<GraphDoc>& corpus);

/// 8 x 8 counts, rows = true sector, columns = predicted.
std::vector<std::vector<long long>> direction_confusion(const GnnModel& model, const std::vector<GraphDoc>& corpus);

/// h^G for every node (rows ordered by segment id).
Tensor embed_nodes(const Document& doc, const DocumentGraph& graph, const GnnModel& model);

std::string loss_history_csv(const LossHistory& history);

}  // namespace docgraph
