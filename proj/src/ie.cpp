#include "docgraph/ie.hpp"

#include <algorithm>
#include <random>
#include <set>

#include "docgraph/error.hpp"

namespace docgraph {

TagScheme::TagScheme(const std::vector<std::string>& label_set) {
  std::set<std::string> labels;
  for (const auto& l : label_set) {
    if (l != kOutsideLabel && !l.empty()) labels.insert(l);
  }
  labels_.assign(labels.begin(), labels.end());
  tags_.push_back("O");
  for (const auto& l : labels_) {
    tags_.push_back("B-" + l);
    tags_.push_back("I-" + l);
  }
}

int TagScheme::id(const std::string& tag) const {
  auto it = std::find(tags_.begin(), tags_.end(), tag);
  if (it == tags_.end()) throw Error(ErrorCode::LabelSetMismatch, "tag " + tag + " is not in the scheme");
  return static_cast<int>(it - tags_.begin());
}

std::vector<std::string> bio_tags(const Document& doc) {
  std::vector<std::string> tags;
  for (const auto& seg : doc.segments) {
    const bool entity = seg.label && *seg.label != kOutsideLabel;
    for (std::size_t k = 0; k < seg.tokens.size(); ++k) {
      tags.push_back(entity ? (k == 0 ? "B-" : "I-") + *seg.label : "O");
    }
  }
  return tags;
}

std::vector<int> token_alignment(const Document& doc) {
  std::vector<int> alignment;
  for (const auto& seg : doc.segments) alignment.insert(alignment.end(), seg.tokens.size(), seg.id);
  return alignment;
}

Tensor token_embeddings(const Document& doc, const TextEmbedder& embedder) {
  const auto alignment = token_alignment(doc);
  Tensor out(alignment.size(), static_cast<std::size_t>(embedder.dim()));
  std::size_t row = 0;
  for (const auto& seg : doc.segments) {
    for (std::size_t k = 0; k < seg.tokens.size(); ++k, ++row) {
      const auto v = embed_token_in_context(seg, k, embedder);
      std::copy(v.begin(), v.end(), out.data.begin() + static_cast<std::ptrdiff_t>(row * v.size()));
    }
  }
  return out;
}

Tensor token_embeddings(const Document& doc, const ExternalEmbeddings& external) {
  const auto alignment = token_alignment(doc);
  Tensor out(alignment.size(), static_cast<std::size_t>(external.dim()));
  std::size_t row = 0;
  for (const auto& seg : doc.segments) {
    for (std::size_t k = 0; k < seg.tokens.size(); ++k, ++row) {
      const auto& v = external.lookup(doc.doc_id, token_key(seg.id, static_cast<int>(k)));
      std::copy(v.begin(), v.end(), out.data.begin() + static_cast<std::ptrdiff_t>(row * v.size()));
    }
  }
  return out;
}

FusedTokenMatrix fuse(const Tensor& tokens_hl, const std::vector<int>& alignment, const Tensor& hg) {
  if (alignment.size() != tokens_hl.rows()) {
    throw Error(ErrorCode::LengthMismatch, "alignment must cover every token");
  }
  const std::size_t dl = tokens_hl.cols(), dg = hg.cols();
  FusedTokenMatrix out;
  out.features = Tensor(tokens_hl.rows(), dl + dg);
  out.alignment = alignment;
  out.text_dim = static_cast<int>(dl);
  out.graph_dim = static_cast<int>(dg);
  for (std::size_t t = 0; t < alignment.size(); ++t) {
    const int seg = alignment[t];
    if (seg < 0 || static_cast<std::size_t>(seg) >= hg.rows()) {
      throw Error(ErrorCode::MissingSegmentEmbedding, "no graph embedding for segment " + std::to_string(seg));
    }
    std::copy_n(&tokens_hl.data[t * dl], dl, &out.features.data[t * (dl + dg)]);
    std::copy_n(&hg.data[static_cast<std::size_t>(seg) * dg], dg, &out.features.data[t * (dl + dg) + dl]);
  }
  return out;
}

void IeConfig::validate() const {
  if (epochs < 1) throw Error(ErrorCode::InvalidConfig, "IE epochs must be >= 1");
  if (batch_size < 1) throw Error(ErrorCode::InvalidConfig, "IE batch_size must be >= 1");
  if (!(lr > 0) || !(gnn_lr > 0)) throw Error(ErrorCode::InvalidConfig, "IE learning rates must be positive");
}

IeHead::IeHead(int text_dim, int graph_dim, int tag_count, std::uint64_t seed)
    : text_dim_(text_dim), graph_dim_(graph_dim), tag_count_(tag_count) {
  const auto tc = static_cast<std::size_t>(tag_count);
  Tensor prefix = glorot_uniform(static_cast<std::size_t>(text_dim), tc, seed, kWeight);
  Tensor w(static_cast<std::size_t>(text_dim + graph_dim), tc);
  std::copy(prefix.data.begin(), prefix.data.end(), w.data.begin());
  params_.add(kWeight, std::move(w));
  params_.add(kBias, Tensor(1, tc));
}

Tensor IeHead::logits(const Tensor& features) const {
  const Tensor& w = params_.get(kWeight);
  if (features.cols() != w.rows()) throw Error(ErrorCode::DimensionMismatch, "IE features do not match head width");
  Tape tape;
  Tensor wc = w, bc = params_.get(kBias);
  Var out = tape.add_bias(tape.matmul(tape.constant(features), tape.constant(std::move(wc))),
                          tape.constant(std::move(bc)));
  return tape.value(out);
}

std::vector<int> IeHead::predict(const Tensor& features) const {
  const Tensor l = logits(features);
  std::vector<int> out;
  out.reserve(l.rows());
  for (std::size_t i = 0; i < l.rows(); ++i) {
    const auto row = l.row(i);
    out.push_back(static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin()));
  }
  return out;
}

Tensor example_features(const IeExample& ex, const GnnModel* gnn) {
  if (ex.h_g) return fuse(ex.h_l, ex.alignment, *ex.h_g).features;
  if (gnn && ex.node_inputs) return fuse(ex.h_l, ex.alignment, gnn->embed(*ex.node_inputs)).features;
  return ex.h_l;
}

EntityMetrics evaluate_head(const IeHead& head, const std::vector<IeExample>& examples, const TagScheme& scheme,
                            const GnnModel* gnn) {
  std::vector<std::vector<std::string>> pred, gold;
  for (const auto& ex : examples) {
    const auto ids = head.predict(example_features(ex, gnn));
    std::vector<std::string> p, g;
    for (int id : ids) p.push_back(scheme.tag(id));
    for (int id : ex.tags) g.push_back(scheme.tag(id));
    pred.push_back(std::move(p));
    gold.push_back(std::move(g));
  }
  return evaluate_entities(pred, gold);
}

namespace {

int graph_width(const IeExample& ex, const GnnModel* gnn) {
  if (ex.h_g) return static_cast<int>(ex.h_g->cols());
  if (gnn && ex.node_inputs) return gnn->config().hidden_dim;
  return 0;
}

}  // namespace

IeTrainResult train_ie_head(const std::vector<IeExample>& train, const std::vector<IeExample>& eval,
                            const TagScheme& scheme, const IeConfig& cfg, GnnModel* gnn) {
  cfg.validate();
  if (train.empty()) throw Error(ErrorCode::EmptyCorpus, "no IE training documents");
  const bool joint = cfg.joint_finetune && gnn != nullptr;
  if (cfg.joint_finetune && !gnn) throw Error(ErrorCode::InvalidConfig, "joint fine-tuning needs a GNN");

  const int text_dim = static_cast<int>(train.front().h_l.cols());
  const int graph_dim = graph_width(train.front(), gnn);
  for (const auto& set : {&train, &eval}) {
    for (const auto& ex : *set) {
      if (static_cast<int>(ex.h_l.cols()) != text_dim || graph_width(ex, gnn) != graph_dim) {
        throw Error(ErrorCode::DimensionMismatch, ex.doc_id + ": feature widths differ across documents");
      }
      if (ex.tags.size() != ex.h_l.rows() || ex.alignment.size() != ex.h_l.rows()) {
        throw Error(ErrorCode::LengthMismatch, ex.doc_id + ": tags and tokens differ in count");
      }
      for (int t : ex.tags) {
        if (t < 0 || t >= scheme.size()) throw Error(ErrorCode::LabelSetMismatch, ex.doc_id + ": tag id out of range");
      }
      if (joint && (!ex.node_inputs || ex.h_g)) {
        throw Error(ErrorCode::InvalidConfig, ex.doc_id + ": joint fine-tuning reads node inputs, not frozen h_g");
      }
    }
  }

  IeTrainResult result{IeHead(text_dim, graph_dim, scheme.size(), cfg.seed), {}};
  IeHead& head = result.head;
  Adam head_adam(cfg.lr);
  Adam gnn_adam(cfg.gnn_lr);

  // Frozen arms read fixed features; compute them once.
  std::vector<Tensor> fixed;
  if (!joint) {
    for (const auto& ex : train) fixed.push_back(example_features(ex, gnn));
  }

  std::mt19937_64 rng(cfg.seed ^ 0xa4093822299f31d0ULL);
  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[static_cast<std::size_t>(rng() % i)]);
    }
    double loss_sum = 0;
    long long token_total = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      long long batch_tokens = 0;
      for (std::size_t i = start; i < stop; ++i) batch_tokens += static_cast<long long>(train[order[i]].tags.size());
      if (batch_tokens == 0) continue;

      head.params().zero_grad();
      if (joint) gnn->params().zero_grad();
      for (std::size_t i = start; i < stop; ++i) {
        const IeExample& ex = train[order[i]];
        if (ex.tags.empty()) continue;
        Tape tape;
        Var x;
        if (joint) {
          Var hg = gnn->forward(tape, *ex.node_inputs);
          x = tape.concat_cols(tape.constant(ex.h_l), tape.gather_rows(hg, ex.alignment));
        } else {
          x = tape.constant(fixed[order[i]]);
        }
        Var logits = tape.add_bias(tape.matmul(x, tape.param(head.params().get(IeHead::kWeight))),
                                   tape.param(head.params().get(IeHead::kBias)));
        Var ce = tape.softmax_xent(logits, ex.tags);
        Var loss = tape.weighted_sum(ce, std::vector<double>(ex.tags.size(), 1.0 / static_cast<double>(batch_tokens)));
        for (double v : tape.value(ce).data) loss_sum += v;
        tape.backward(loss);
      }
      token_total += batch_tokens;
      head_adam.step(head.params());
      if (joint) gnn_adam.step(gnn->params());
    }

    IeEpoch stats;
    stats.epoch = epoch;
    stats.loss = token_total ? loss_sum / static_cast<double>(token_total) : 0.0;
    long long correct = 0, seen = 0;
    for (std::size_t i = 0; i < train.size(); ++i) {
      const auto pred = head.predict(joint ? example_features(train[i], gnn) : fixed[i]);
      for (std::size_t t = 0; t < pred.size(); ++t) correct += pred[t] == train[i].tags[t];
      seen += static_cast<long long>(pred.size());
    }
    stats.train_accuracy = seen ? static_cast<double>(correct) / static_cast<double>(seen) : 0.0;
    if (!eval.empty()) stats.eval = evaluate_head(head, eval, scheme, gnn);
    result.history.push_back(std::move(stats));
  }
  return result;
}

}  // namespace docgraph
