#include "docgraph/gnn.hpp"

#include <cmath>
#include <random>

#include "docgraph/error.hpp"

namespace docgraph {

namespace {

std::uint64_t mix(std::uint64_t seed, const std::string& name) {
  std::uint64_t h = 1469598103934665603ULL ^ seed;
  for (unsigned char c : name) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Bit-level conversion so initial weights match across standard libraries.
double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, std::uint64_t seed, const std::string& name) {
  std::mt19937_64 rng(mix(seed, name));
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor t(fan_in, fan_out);
  for (double& x : t.data) x = (2.0 * unit_uniform(rng) - 1.0) * a;
  return t;
}

Tensor sage_forward(const Tensor& h, const std::vector<std::vector<int>>& adjacency, const SageLayer& layer) {
  if (layer.w_self.rows() != h.cols() || layer.w_neigh.rows() != h.cols() ||
      layer.w_self.cols() != layer.w_neigh.cols() || layer.bias.size() != layer.w_self.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "sage layer does not fit input width");
  }
  Tape tape;
  Tensor ws = layer.w_self, wn = layer.w_neigh, b = layer.bias;
  Var x = tape.constant(h);
  Var self_term = tape.matmul(x, tape.constant(ws));
  Var neigh_term = tape.matmul(tape.mean_neighbors(x, adjacency), tape.constant(wn));
  Var out = tape.relu(tape.add_bias(tape.add(self_term, neigh_term), tape.constant(b)));
  return tape.value(out);
}

double distance_head(std::span<const double> h_u, std::span<const double> h_v, double w, double b) {
  if (h_u.size() != h_v.size()) throw Error(ErrorCode::DimensionMismatch, "distance_head: widths differ");
  double dot = 0;
  for (std::size_t i = 0; i < h_u.size(); ++i) dot += h_u[i] * h_v[i];
  return w * dot + b;
}

std::array<double, kSectorCount> direction_head(std::span<const double> h_u, std::span<const double> h_v,
                                                const Tensor& w) {
  if (h_u.size() != h_v.size() || w.rows() != h_u.size() || w.cols() != kSectorCount) {
    throw Error(ErrorCode::DimensionMismatch, "direction_head: W must be D_h x 8");
  }
  std::array<double, kSectorCount> logits{};
  for (std::size_t i = 0; i < h_u.size(); ++i) {
    const double p = h_u[i] * h_v[i];
    for (int k = 0; k < kSectorCount; ++k) logits[static_cast<std::size_t>(k)] += p * w.at(i, static_cast<std::size_t>(k));
  }
  const auto probs = softmax(logits);
  std::array<double, kSectorCount> out{};
  std::copy(probs.begin(), probs.end(), out.begin());
  return out;
}

LossParts joint_loss(const PairBatch& batch, const std::vector<PairPrediction>& preds, double lambda) {
  if (batch.empty()) throw Error(ErrorCode::EmptyBatch, "joint_loss needs at least one pair");
  if (preds.size() != batch.size()) throw Error(ErrorCode::LengthMismatch, "one prediction per pair");
  LossParts parts;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Pair& p = batch[i];
    const double weight = 1.0 - p.r;
    const double err = preds[i].distance - p.y_e;
    const double ce = -std::log(preds[i].direction[static_cast<std::size_t>(p.y_d)]);
    parts.mse += weight * err * err;
    parts.ce += weight * ce;
    parts.total += (lambda * err * err + (1.0 - lambda) * ce) * weight;
  }
  return parts;
}

PairBatch pairs_from_graph(const DocumentGraph& graph) {
  PairBatch batch;
  batch.reserve(graph.directed_edges.size());
  for (const auto& e : graph.directed_edges) batch.push_back(Pair{e.src, e.dst, e.e_dis, sector_index(e.e_dir), e.r});
  return batch;
}

NodeFeatures node_features(const Document& doc, const DocumentGraph& graph, const TextEmbedder& embedder) {
  if (static_cast<int>(doc.segments.size()) != graph.node_count) {
    throw Error(ErrorCode::GraphDocMismatch, doc.doc_id + ": graph node count differs from segment count");
  }
  NodeFeatures f;
  f.text = Tensor(doc.segments.size(), static_cast<std::size_t>(embedder.dim()));
  f.size = Tensor(doc.segments.size(), 2);
  for (std::size_t u = 0; u < doc.segments.size(); ++u) {
    const auto& seg = doc.segments[u];
    const auto words = segment_words(seg);
    const auto v = embedder.embed(words);
    std::copy(v.begin(), v.end(), f.text.data.begin() + static_cast<std::ptrdiff_t>(u * v.size()));
    f.size.at(u, 0) = seg.bbox.width() / 1000.0;
    f.size.at(u, 1) = seg.bbox.height() / 1000.0;
  }
  f.adjacency = graph.mp_adjacency;
  return f;
}

GnnModel::GnnModel(const GnnConfig& config, std::uint64_t seed) : config_(config) {
  if (config.layers < 1 || config.hidden_dim < 1 || config.text_dim < 1 || config.size_dim < 1) {
    throw Error(ErrorCode::InvalidConfig, "GNN dimensions and layer count must be positive");
  }
  const auto sd = static_cast<std::size_t>(config.size_dim);
  const auto hd = static_cast<std::size_t>(config.hidden_dim);
  params_.add(kSizeProj, glorot_uniform(2, sd, seed, kSizeProj));
  std::size_t in = static_cast<std::size_t>(config.input_dim());
  for (int l = 0; l < config.layers; ++l) {
    params_.add(self_name(l), glorot_uniform(in, hd, seed, self_name(l)));
    params_.add(neigh_name(l), glorot_uniform(in, hd, seed, neigh_name(l)));
    params_.add(bias_name(l), Tensor(1, hd));
    in = hd;
  }
  // A negative start would make shrinking h the fastest way to raise the
  // predicted distance, which drives every ReLU to zero early in training.
  Tensor dist_w(1, 1);
  dist_w.data[0] = 1.0;
  params_.add(kDistW, std::move(dist_w));
  params_.add(kDistB, Tensor(1, 1));
  params_.add(kDirW, glorot_uniform(hd, kSectorCount, seed, kDirW));
}

GnnModel::GnnModel(const GnnConfig& config, ParamStore params) : config_(config), params_(std::move(params)) {
  const auto sd = static_cast<std::size_t>(config.size_dim);
  const auto hd = static_cast<std::size_t>(config.hidden_dim);
  auto expect = [&](const std::string& name, std::size_t r, std::size_t c) {
    const Tensor& t = params_.get(name);
    if (t.rows() != r || t.cols() != c) throw Error(ErrorCode::DimensionMismatch, "parameter " + name + " shape");
  };
  expect(kSizeProj, 2, sd);
  std::size_t in = static_cast<std::size_t>(config.input_dim());
  for (int l = 0; l < config.layers; ++l) {
    expect(self_name(l), in, hd);
    expect(neigh_name(l), in, hd);
    expect(bias_name(l), 1, hd);
    in = hd;
  }
  expect(kDistW, 1, 1);
  expect(kDistB, 1, 1);
  expect(kDirW, hd, kSectorCount);
}

SageLayer GnnModel::layer(int l) const {
  return SageLayer{params_.get(self_name(l)), params_.get(neigh_name(l)), params_.get(bias_name(l))};
}

Var GnnModel::forward(Tape& tape, const NodeFeatures& features) {
  if (features.text.cols() != static_cast<std::size_t>(config_.text_dim)) {
    throw Error(ErrorCode::DimensionMismatch, "text features do not match the model's text_dim");
  }
  Var size_emb = tape.matmul(tape.constant(features.size), tape.param(params_.get(kSizeProj)));
  Var h = tape.concat_cols(tape.constant(features.text), size_emb);
  for (int l = 0; l < config_.layers; ++l) {
    Var self_term = tape.matmul(h, tape.param(params_.get(self_name(l))));
    Var neigh_term = tape.matmul(tape.mean_neighbors(h, features.adjacency), tape.param(params_.get(neigh_name(l))));
    h = tape.relu(tape.add_bias(tape.add(self_term, neigh_term), tape.param(params_.get(bias_name(l)))));
  }
  return h;
}

GnnModel::PairOutputs GnnModel::predict_pairs(Tape& tape, Var nodes, const PairBatch& batch) {
  std::vector<int> us, vs;
  us.reserve(batch.size());
  vs.reserve(batch.size());
  for (const auto& p : batch) {
    us.push_back(p.u);
    vs.push_back(p.v);
  }
  Var hu = tape.gather_rows(nodes, std::move(us));
  Var hv = tape.gather_rows(nodes, std::move(vs));
  Var dist = tape.add_bias(tape.matmul(tape.row_dot(hu, hv), tape.param(params_.get(kDistW))),
                           tape.param(params_.get(kDistB)));
  Var logits = tape.matmul(tape.hadamard(hu, hv), tape.param(params_.get(kDirW)));
  return {dist, logits};
}

Var GnnModel::loss(Tape& tape, const NodeFeatures& features, const PairBatch& batch, double lambda,
                   LossParts* parts, std::vector<int>* predicted_dirs) {
  if (batch.empty()) throw Error(ErrorCode::EmptyBatch, "loss needs at least one pair");
  Var nodes = forward(tape, features);
  auto out = predict_pairs(tape, nodes, batch);

  std::vector<double> targets, weights;
  std::vector<int> labels;
  for (const auto& p : batch) {
    targets.push_back(p.y_e);
    labels.push_back(p.y_d);
    weights.push_back(1.0 - p.r);
  }
  Var sq = tape.squared_error(out.distance, std::move(targets));
  Var ce = tape.softmax_xent(out.logits, std::move(labels));
  Var combined = tape.add(tape.scale(sq, lambda), tape.scale(ce, 1.0 - lambda));

  if (parts) {
    *parts = LossParts{};
    for (std::size_t i = 0; i < batch.size(); ++i) {
      parts->mse += weights[i] * tape.value(sq).data[i];
      parts->ce += weights[i] * tape.value(ce).data[i];
    }
  }
  if (predicted_dirs) {
    predicted_dirs->clear();
    const Tensor& logits = tape.value(out.logits);
    for (std::size_t i = 0; i < logits.rows(); ++i) {
      const auto row = logits.row(i);
      predicted_dirs->push_back(static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin()));
    }
  }
  Var total = tape.weighted_sum(combined, std::move(weights));
  if (parts) parts->total = tape.value(total).data[0];
  return total;
}

Tensor GnnModel::embed(const NodeFeatures& features) const {
  Tape tape;
  // forward() only reads parameters; the const_cast never leads to a write.
  Var h = const_cast<GnnModel*>(this)->forward(tape, features);
  return tape.value(h);
}

void Adam::step(ParamStore& params, const std::vector<std::string>& names) {
  for (const auto& name : names) {
    Tensor& p = params.get(name);
    if (p.grad.size() != p.data.size()) continue;
    Moments& st = state_[name];
    if (st.m.empty()) {
      st.m.assign(p.size(), 0.0);
      st.v.assign(p.size(), 0.0);
    }
    ++st.t;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(st.t));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(st.t));
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double g = p.grad[i];
      st.m[i] = beta1_ * st.m[i] + (1.0 - beta1_) * g;
      st.v[i] = beta2_ * st.v[i] + (1.0 - beta2_) * g * g;
      const double mhat = st.m[i] / c1;
      const double vhat = st.v[i] / c2;
      p.data[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

}  // namespace docgraph
