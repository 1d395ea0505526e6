#include "docgraph/experiment.hpp"

#include <algorithm>
#include <cstdio>

#include "docgraph/error.hpp"

namespace docgraph {

void ExperimentConfig::validate() const {
  if (trials < 1) throw Error(ErrorCode::InvalidConfig, "trials must be >= 1");
  if (n_docs < 1 || n_eval_docs < 1) throw Error(ErrorCode::InvalidConfig, "document counts must be >= 1");
  if (token_dim < 1) throw Error(ErrorCode::InvalidConfig, "token_dim must be >= 1");
  if (arms.empty()) throw Error(ErrorCode::InvalidConfig, "at least one arm is required");
  for (const auto& a : arms) {
    if (a != kFusedArm && a != kTextOnlyArm) throw Error(ErrorCode::InvalidConfig, "unknown arm " + a);
  }
  link.validate();
  ie.validate();
}

const ArmResult& TrialResult::arm(const std::string& name) const {
  for (const auto& a : arms) {
    if (a.name == name) return a;
  }
  throw Error(ErrorCode::MissingKey, "arm " + name);
}

const ArmSummary& ExperimentResult::arm(const std::string& name) const {
  for (const auto& a : arms) {
    if (a.name == name) return a;
  }
  throw Error(ErrorCode::MissingKey, "arm " + name);
}

TrialCorpus synthetic_trial_corpus(const ExperimentConfig& cfg, std::uint64_t trial_seed) {
  SyntheticSpec train{trial_seed, cfg.n_docs, cfg.min_nodes, cfg.max_nodes};
  SyntheticSpec eval{trial_seed + 0x9e3779b9ULL, cfg.n_eval_docs, cfg.min_nodes, cfg.max_nodes};
  return TrialCorpus{build_corpus_graphs(generate_synthetic_corpus(train)),
                     build_corpus_graphs(generate_synthetic_corpus(eval))};
}

std::string corpus_digest(const std::vector<GraphDoc>& docs) {
  std::uint64_t h = 14695981039346656037ULL;
  for (const auto& gd : docs) {
    for (unsigned char c : document_to_json(gd.doc)) {
      h ^= c;
      h *= 1099511628211ULL;
    }
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<IeExample> make_ie_examples(const std::vector<GraphDoc>& docs, const TagScheme& scheme,
                                        const TextEmbedder& token_embedder, const GnnModel* model) {
  std::vector<IeExample> out;
  out.reserve(docs.size());
  for (const auto& gd : docs) {
    IeExample ex;
    ex.doc_id = gd.doc.doc_id;
    ex.h_l = token_embeddings(gd.doc, token_embedder);
    ex.alignment = token_alignment(gd.doc);
    for (const auto& t : bio_tags(gd.doc)) ex.tags.push_back(scheme.id(t));
    if (model) ex.h_g = embed_nodes(gd.doc, gd.graph, *model);
    out.push_back(std::move(ex));
  }
  return out;
}

namespace {

std::vector<IeExample> joint_examples(const std::vector<GraphDoc>& docs, const TagScheme& scheme,
                                      const TextEmbedder& token_embedder, const GnnModel& model) {
  auto out = make_ie_examples(docs, scheme, token_embedder, nullptr);
  for (std::size_t i = 0; i < docs.size(); ++i) {
    out[i].node_inputs = node_features(docs[i].doc, docs[i].graph, model.text_embedder());
  }
  return out;
}

std::vector<std::string> labels_of(const TrialCorpus& corpus) {
  std::vector<Document> docs;
  for (const auto* set : {&corpus.train, &corpus.eval}) {
    for (const auto& gd : *set) docs.push_back(gd.doc);
  }
  return collect_labels(docs);
}

}  // namespace

TrialResult run_trial(const TrialCorpus& corpus, const ExperimentConfig& cfg, std::uint64_t trial_seed) {
  cfg.validate();
  TrialResult trial;
  trial.seed = trial_seed;

  const bool needs_graph = std::find(cfg.arms.begin(), cfg.arms.end(), kFusedArm) != cfg.arms.end();
  GnnModel model;
  if (needs_graph) {
    TrainConfig link = cfg.link;
    link.seed = trial_seed;
    auto trained = train_link_prediction(corpus.train, link);
    model = std::move(trained.model);
    trial.link_history = std::move(trained.history);
    trial.heldout_direction_accuracy = direction_accuracy(model, corpus.eval);
  }

  const TagScheme scheme(labels_of(corpus));
  const TextEmbedder token_embedder(cfg.token_dim, cfg.link.gnn.hash_seed);
  IeConfig ie = cfg.ie;
  ie.seed = trial_seed;
  const std::string digest = corpus_digest(corpus.train) + "/" + corpus_digest(corpus.eval);

  for (const auto& name : cfg.arms) {
    ArmResult arm;
    arm.name = name;
    arm.corpus_digest = digest;
    IeTrainResult trained;
    if (name == kFusedArm && ie.joint_finetune) {
      GnnModel tuned = model;
      trained = train_ie_head(joint_examples(corpus.train, scheme, token_embedder, tuned),
                              joint_examples(corpus.eval, scheme, token_embedder, tuned), scheme, ie, &tuned);
      arm.consumed_checkpoint = true;
    } else {
      const GnnModel* gnn = name == kFusedArm ? &model : nullptr;
      IeConfig frozen = ie;
      frozen.joint_finetune = false;
      trained = train_ie_head(make_ie_examples(corpus.train, scheme, token_embedder, gnn),
                              make_ie_examples(corpus.eval, scheme, token_embedder, gnn), scheme, frozen);
      arm.consumed_checkpoint = gnn != nullptr;
    }
    for (const auto& e : trained.history) {
      arm.f1_curve.push_back(e.eval.f1);
      arm.loss_curve.push_back(e.loss);
    }
    arm.final_metrics = trained.history.back().eval;
    trial.arms.push_back(std::move(arm));
  }
  verify_same_corpus(trial);
  return trial;
}

void verify_same_corpus(const TrialResult& trial) {
  for (const auto& a : trial.arms) {
    if (a.corpus_digest != trial.arms.front().corpus_digest) {
      throw Error(ErrorCode::IntegrityMismatch, "arm " + a.name + " ran on corpus " + a.corpus_digest + ", arm " +
                                                    trial.arms.front().name + " on " +
                                                    trial.arms.front().corpus_digest);
    }
  }
}

ExperimentResult summarize(std::vector<TrialResult> trials) {
  if (trials.empty()) throw Error(ErrorCode::EmptyHistory, "no trials to summarise");
  ExperimentResult result;
  result.trials = std::move(trials);
  for (const auto& first : result.trials.front().arms) {
    ArmSummary s;
    s.name = first.name;
    const std::size_t epochs = first.f1_curve.size();
    s.mean_curve.assign(epochs, 0.0);
    s.mean_loss_curve.assign(epochs, 0.0);
    for (const auto& t : result.trials) {
      const ArmResult& a = t.arm(first.name);
      if (a.f1_curve.size() != epochs || a.loss_curve.size() != epochs) throw Error(ErrorCode::LengthMismatch, "trials differ in epoch count");
      s.per_trial_f1.push_back(a.final_metrics.f1);
      s.epochs_to_threshold_per_trial.push_back(epochs_to_fraction(a.f1_curve));
      for (std::size_t e = 0; e < epochs; ++e) {
        s.mean_curve[e] += a.f1_curve[e];
        s.mean_loss_curve[e] += a.loss_curve[e];
      }
    }
    const auto n = static_cast<double>(result.trials.size());
    for (double& v : s.mean_curve) v /= n;
    for (double& v : s.mean_loss_curve) v /= n;
    for (double f : s.per_trial_f1) s.mean_f1 += f / n;
    s.epochs_to_threshold_mean_curve = epochs_to_fraction(s.mean_curve);
    result.arms.push_back(std::move(s));
  }

  const auto has = [&](const char* name) {
    return std::any_of(result.arms.begin(), result.arms.end(), [&](const ArmSummary& a) { return a.name == name; });
  };
  if (has(kFusedArm) && has(kTextOnlyArm)) {
    const ArmSummary& fused = result.arm(kFusedArm);
    const ArmSummary& text = result.arm(kTextOnlyArm);
    result.f1_delta_points = 100.0 * (fused.mean_f1 - text.mean_f1);
    result.sign_test = paired_sign_test(fused.per_trial_f1, text.per_trial_f1);
    for (std::size_t i = 0; i < result.trials.size(); ++i) {
      if (fused.epochs_to_threshold_per_trial[i] <= text.epochs_to_threshold_per_trial[i]) ++result.convergence_wins;
    }
  }
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<TrialResult> trials;
  for (int t = 0; t < cfg.trials; ++t) {
    const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(t);
    trials.push_back(run_trial(synthetic_trial_corpus(cfg, seed), cfg, seed));
  }
  return summarize(std::move(trials));
}

std::string per_trial_csv(const ExperimentResult& result) {
  std::string out = "trial_seed,arm,final_f1,precision,recall,epochs_to_90pct_final,heldout_direction_accuracy\n";
  char buf[256];
  for (std::size_t i = 0; i < result.trials.size(); ++i) {
    const auto& t = result.trials[i];
    for (const auto& a : t.arms) {
      const auto& summary = result.arm(a.name);
      std::snprintf(buf, sizeof buf, "%llu,%s,%.6f,%.6f,%.6f,%d,%.6f\n", static_cast<unsigned long long>(t.seed),
                    a.name.c_str(), a.final_metrics.f1, a.final_metrics.precision, a.final_metrics.recall,
                    summary.epochs_to_threshold_per_trial[i], t.heldout_direction_accuracy);
      out += buf;
    }
  }
  return out;
}

}  // namespace docgraph
