#include "docgraph/link_training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "docgraph/error.hpp"

namespace docgraph {

void TrainConfig::validate() const {
  if (epochs < 1) throw Error(ErrorCode::InvalidConfig, "epochs must be >= 1");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw Error(ErrorCode::InvalidConfig, "lambda must lie in [0, 1]");
  if (batch_size < 1) throw Error(ErrorCode::InvalidConfig, "batch_size must be >= 1");
  if (!(lr > 0)) throw Error(ErrorCode::InvalidConfig, "lr must be positive");
  if (extra_pair_count < 0) throw Error(ErrorCode::InvalidConfig, "extra_pair_count must be >= 0");
}

std::vector<GraphDoc> build_corpus_graphs(const std::vector<Document>& docs) {
  std::vector<GraphDoc> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back(GraphDoc{d, build_graph(d)});
  return out;
}

namespace {

// Random pairs that are not already D-LoS edges, labelled with their true
// geometry; r uses the document's edge range and is clamped to [0, 1].
void add_extra_pairs(const GraphDoc& gd, int count, std::mt19937_64& rng, PairBatch& batch) {
  const int n = gd.graph.node_count;
  if (n < 2 || count == 0) return;
  double lo = 0, hi = 0;
  if (!gd.graph.directed_edges.empty()) {
    lo = hi = gd.graph.directed_edges.front().e_dis;
    for (const auto& e : gd.graph.directed_edges) {
      lo = std::min(lo, e.e_dis);
      hi = std::max(hi, e.e_dis);
    }
  }
  int added = 0;
  for (int attempt = 0; attempt < 20 * count && added < count; ++attempt) {
    const int u = static_cast<int>(rng() % static_cast<std::uint64_t>(n));
    const int v = static_cast<int>(rng() % static_cast<std::uint64_t>(n));
    if (u == v) continue;
    const BBox& a = gd.doc.segments[static_cast<std::size_t>(u)].bbox;
    const BBox& b = gd.doc.segments[static_cast<std::size_t>(v)].bbox;
    if (centers_coincide(a, b)) continue;
    const auto f = edge_feature(a, b);
    double r = hi > lo ? (f.e_dis - lo) / (hi - lo) : 0.0;
    r = std::clamp(r, 0.0, 1.0);
    batch.push_back(Pair{u, v, f.e_dis, sector_index(f.e_dir), r});
    ++added;
  }
}

}  // namespace

LinkTrainResult train_link_prediction(const std::vector<GraphDoc>& corpus, const TrainConfig& cfg) {
  cfg.validate();
  if (corpus.empty()) throw Error(ErrorCode::EmptyCorpus, "no documents to train on");

  LinkTrainResult result{GnnModel(cfg.gnn, cfg.seed), {}};
  GnnModel& model = result.model;
  const TextEmbedder embedder = model.text_embedder();

  std::vector<NodeFeatures> features;
  features.reserve(corpus.size());
  for (const auto& gd : corpus) features.push_back(node_features(gd.doc, gd.graph, embedder));

  Adam adam(cfg.lr);
  std::mt19937_64 rng(cfg.seed ^ 0x13198a2e03707344ULL);
  std::vector<std::size_t> order(corpus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[static_cast<std::size_t>(rng() % i)]);
    }
    EpochStats stats;
    stats.epoch = epoch;
    long long correct = 0;

    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      std::vector<PairBatch> batches;
      long long step_pairs = 0;
      for (std::size_t i = start; i < stop; ++i) {
        const GraphDoc& gd = corpus[order[i]];
        PairBatch batch = pairs_from_graph(gd.graph);
        add_extra_pairs(gd, cfg.extra_pair_count, rng, batch);
        step_pairs += static_cast<long long>(batch.size());
        batches.push_back(std::move(batch));
      }
      if (step_pairs == 0) continue;

      model.params().zero_grad();
      for (std::size_t i = start; i < stop; ++i) {
        const PairBatch& batch = batches[i - start];
        if (batch.empty()) continue;
        Tape tape;
        LossParts parts;
        std::vector<int> predicted;
        Var loss = model.loss(tape, features[order[i]], batch, cfg.lambda, &parts, &predicted);
        if (!std::isfinite(parts.total)) {
          throw Error(ErrorCode::NonFiniteLoss, "epoch " + std::to_string(epoch) + ", document " +
                                                    corpus[order[i]].doc.doc_id + ": loss is " +
                                                    std::to_string(parts.total));
        }
        if (cfg.loss_mean) loss = tape.scale(loss, 1.0 / static_cast<double>(step_pairs));
        tape.backward(loss);
        stats.joint += parts.total;
        stats.mse += parts.mse;
        stats.ce += parts.ce;
        for (std::size_t k = 0; k < batch.size(); ++k) correct += predicted[k] == batch[k].y_d;
      }
      stats.pairs += step_pairs;
      adam.step(model.params());
    }
    if (stats.pairs > 0) {
      const auto n = static_cast<double>(stats.pairs);
      stats.joint /= n;
      stats.mse /= n;
      stats.ce /= n;
      stats.direction_accuracy = static_cast<double>(correct) / n;
    }
    result.history.push_back(stats);
  }
  return result;
}

std::vector<std::vector<long long>> direction_confusion(const GnnModel& model, const std::vector<GraphDoc>& corpus) {
  std::vector<std::vector<long long>> confusion(kSectorCount, std::vector<long long>(kSectorCount, 0));
  const TextEmbedder embedder = model.text_embedder();
  const Tensor& w = model.params().get(GnnModel::kDirW);
  for (const auto& gd : corpus) {
    const Tensor h = model.embed(node_features(gd.doc, gd.graph, embedder));
    for (const auto& e : gd.graph.directed_edges) {
      const auto p = direction_head(h.row(static_cast<std::size_t>(e.src)), h.row(static_cast<std::size_t>(e.dst)), w);
      const auto best = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
      ++confusion[static_cast<std::size_t>(sector_index(e.e_dir))][best];
    }
  }
  return confusion;
}

double direction_accuracy(const GnnModel& model, const std::vector<GraphDoc>& corpus) {
  const auto confusion = direction_confusion(model, corpus);
  long long total = 0, correct = 0;
  for (int i = 0; i < kSectorCount; ++i) {
    for (int j = 0; j < kSectorCount; ++j) {
      total += confusion[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      if (i == j) correct += confusion[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

Tensor embed_nodes(const Document& doc, const DocumentGraph& graph, const GnnModel& model) {
  return model.embed(node_features(doc, graph, model.text_embedder()));
}

std::string loss_history_csv(const LossHistory& history) {
  std::string out = "epoch,pairs,joint_loss,mse,ce,direction_accuracy\n";
  char buf[256];
  for (const auto& s : history) {
    std::snprintf(buf, sizeof buf, "%d,%lld,%.10g,%.10g,%.10g,%.10g\n", s.epoch, s.pairs, s.joint, s.mse, s.ce,
                  s.direction_accuracy);
    out += buf;
  }
  return out;
}

}  // namespace docgraph
