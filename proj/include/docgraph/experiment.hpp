#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "docgraph/ie.hpp"
#include "docgraph/link_training.hpp"
#include "docgraph/metrics.hpp"
#include "docgraph/synthetic.hpp"

namespace docgraph {

inline constexpr const char* kFusedArm = "fused";
inline constexpr const char* kTextOnlyArm = "text-only";

struct ExperimentConfig {
  int trials = 10;
  std::uint64_t seed = 1;     // trial t uses seed + t
  int n_docs = 100;           // training documents per trial
  int n_eval_docs = 30;       // held-out documents per trial
  int min_nodes = 20;
  int max_nodes = 40;
  int token_dim = 64;         // D_L of the hashing stand-in
  std::vector<std::string> arms = {kFusedArm, kTextOnlyArm};
  // Calibrated for the synthetic corpus: the link phase steps once per
  // document, and the IE head uses a larger rate than the library default
  // (which is tuned for fine-tuning pretrained token encoders).
  TrainConfig link = calibrated_link();
  IeConfig ie = calibrated_ie();

  void validate() const;

  static TrainConfig calibrated_link() {
    TrainConfig c;
    c.lr = 1e-2;
    c.batch_size = 1;
    return c;
  }
  static IeConfig calibrated_ie() {
    IeConfig c;
    c.lr = 1e-2;
    return c;
  }
};

struct ArmResult {
  std::string name;
  std::vector<double> f1_curve;    // eval F1 after each IE epoch
  std::vector<double> loss_curve;  // mean training cross-entropy per IE epoch
  EntityMetrics final_metrics;
  std::string corpus_digest;     // digest of the train + eval documents the arm saw
  bool consumed_checkpoint = false;
};

struct TrialResult {
  std::uint64_t seed = 0;
  LossHistory link_history;      // empty when no arm needed the GNN
  double heldout_direction_accuracy = 0;
  std::vector<ArmResult> arms;

  const ArmResult& arm(const std::string& name) const;
};

struct ArmSummary {
  std::string name;
  double mean_f1 = 0;
  std::vector<double> per_trial_f1;
  std::vector<double> mean_curve;       // F1, averaged over trials
  std::vector<double> mean_loss_curve;  // IE training loss, averaged over trials
  int epochs_to_threshold_mean_curve = 0;
  std::vector<int> epochs_to_threshold_per_trial;
};

struct ExperimentResult {
  std::vector<TrialResult> trials;
  std::vector<ArmSummary> arms;
  // Filled when both the fused and text-only arms ran.
  double f1_delta_points = 0;  // (fused - text-only) * 100
  SignTest sign_test;
  int convergence_wins = 0;  // trials where fused reached 90% of final no later than text-only

  const ArmSummary& arm(const std::string& name) const;
};

/// Documents and graphs for one trial.
struct TrialCorpus {
  std::vector<GraphDoc> train;
  std::vector<GraphDoc> eval;
};

TrialCorpus synthetic_trial_corpus(const ExperimentConfig& cfg, std::uint64_t trial_seed);

/// Stable hex digest of a document list (FNV-1a over canonical JSON).
std::string corpus_digest(const std::vector<GraphDoc>& docs);

/// Prepares IE inputs for one arm. `model` is only read for the fused arm.
std::vector<IeExample> make_ie_examples(const std::vector<GraphDoc>& docs, const TagScheme& scheme,
                                        const TextEmbedder& token_embedder, const GnnModel* model);

/// Runs every arm on one corpus. The GNN is trained once and shared by the
/// graph-aware arms.
TrialResult run_trial(const TrialCorpus& corpus, const ExperimentConfig& cfg, std::uint64_t trial_seed);

/// Throws IntegrityMismatch when the arms of a trial did not see the same corpus.
void verify_same_corpus(const TrialResult& trial);

ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Aggregates trial results into per-arm summaries and fused-vs-text statistics.
ExperimentResult summarize(std::vector<TrialResult> trials);

std::string per_trial_csv(const ExperimentResult& result);

}  // namespace docgraph
