#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <tuple>
#include <string>
#include <vector>

#include "doctest.h"
#include "docgraph/experiment.hpp"
#include "docgraph/ie.hpp"
#include "docgraph/link_training.hpp"
#include "docgraph/metrics.hpp"
#include "docgraph/synthetic.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace docgraph;
using testing::error_code;

namespace {

std::vector<GraphDoc> small_corpus(std::uint64_t seed, int docs) {
  SyntheticSpec spec;
  spec.seed = seed;
  spec.n_docs = docs;
  return build_corpus_graphs(generate_synthetic_corpus(spec));
}

TrainConfig quick_link(int epochs) {
  TrainConfig c = ExperimentConfig::calibrated_link();
  c.epochs = epochs;
  c.gnn.hidden_dim = 16;
  return c;
}

// Random relabelling of segment ids; the graph is rebuilt from scratch.
Document permuted(const Document& doc, const std::vector<int>& perm) {
  Document out = doc;
  for (std::size_t i = 0; i < doc.segments.size(); ++i) {
    out.segments[perm[i]] = doc.segments[i];
    out.segments[perm[i]].id = perm[i];
  }
  return out;
}

std::vector<std::string> random_tags(std::mt19937_64& rng, int n) {
  static const std::vector<std::string> vocab = {"O", "O", "B-question", "I-question", "B-answer", "I-answer",
                                                 "B-header", "I-header"};
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back(vocab[rng() % vocab.size()]);
  return out;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("synthetic corpus contract") {
  SyntheticSpec spec;
  spec.seed = 5;
  spec.n_docs = 40;
  const auto a = generate_synthetic_corpus(spec);
  const auto b = generate_synthetic_corpus(spec);
  REQUIRE(a.size() == 40);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(serialize_generic(a[i]) == serialize_generic(b[i]));
  spec.seed = 6;
  CHECK(serialize_generic(generate_synthetic_corpus(spec)[0]) != serialize_generic(a[0]));

  for (const auto& doc : a) {
    CHECK(validate_document(doc).ok());
    CHECK(static_cast<int>(doc.size()) >= spec.min_nodes);
    CHECK(static_cast<int>(doc.size()) <= spec.max_nodes);
    int questions = 0, answers = 0;
    for (const auto& s : doc.segments) {
      questions += s.label == "question";
      answers += s.label == "answer";
    }
    CHECK(questions >= 1);
    CHECK(answers >= 1);
    // Every key's East D-LoS neighbour is its own value, which the
    // generator places immediately after it.
    for (const auto& s : doc.segments) {
      if (s.label != "question") continue;
      const auto east = dlos_brute_force(s.id, doc)[Sector::E];
      REQUIRE(east);
      CHECK(doc.segments[east->target_id].label == "answer");
      CHECK(east->target_id == s.id + 1);
    }
  }
  spec.max_nodes = 61;
  CHECK(error_code([&] { generate_synthetic_corpus(spec); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("link training lowers the joint loss and is deterministic") {
  const auto corpus = small_corpus(3, 20);
  const TrainConfig cfg = quick_link(5);
  const auto a = train_link_prediction(corpus, cfg);
  const auto b = train_link_prediction(corpus, cfg);
  REQUIRE(a.history.size() == 5);
  CHECK(a.history.back().joint < a.history.front().joint);
  CHECK(save_checkpoint(a.model.params()) == save_checkpoint(b.model.params()));
  CHECK(loss_history_csv(a.history) == loss_history_csv(b.history));
  for (const auto& e : a.history) {
    CHECK(e.pairs > 0);
    CHECK(e.joint == doctest::Approx(0.5 * e.mse + 0.5 * e.ce).epsilon(1e-9));
  }
}

TEST_CASE("link training edge cases") {
  SUBCASE("single-node document: no pairs, no update") {
    const std::vector<GraphDoc> corpus = build_corpus_graphs({testing::make_doc({{0, 0, 10, 10}})});
    TrainConfig cfg = quick_link(1);
    const GnnModel fresh(cfg.gnn, cfg.seed);
    const auto r = train_link_prediction(corpus, cfg);
    REQUIRE(r.history.size() == 1);
    CHECK(r.history[0].pairs == 0);
    CHECK(r.history[0].joint == 0.0);
    CHECK(r.model.params() == fresh.params());
  }
  SUBCASE("errors") {
    CHECK(error_code([] { train_link_prediction({}, TrainConfig{}); }) == ErrorCode::EmptyCorpus);
    const auto corpus = small_corpus(1, 2);
    TrainConfig cfg = quick_link(1);
    cfg.lambda = 1.5;
    CHECK(error_code([&] { train_link_prediction(corpus, cfg); }) == ErrorCode::InvalidConfig);
    cfg = quick_link(3);
    cfg.lr = 1e200;
    CHECK(error_code([&] { train_link_prediction(corpus, cfg); }) == ErrorCode::NonFiniteLoss);
  }
  SUBCASE("extra pairs carry their true geometry") {
    const auto corpus = small_corpus(2, 3);
    TrainConfig cfg = quick_link(1);
    cfg.extra_pair_count = 10;
    const auto r = train_link_prediction(corpus, cfg);
    long long edges = 0;
    for (const auto& gd : corpus) edges += static_cast<long long>(gd.graph.directed_edges.size());
    CHECK(r.history[0].pairs == edges + 30);
  }
}

TEST_CASE("lambda = 1 leaves the direction head untouched") {
  const auto corpus = small_corpus(1, 100);
  TrainConfig cfg = ExperimentConfig::calibrated_link();
  cfg.lambda = 1.0;
  cfg.seed = 1;
  const GnnModel fresh(cfg.gnn, cfg.seed);
  const auto r = train_link_prediction(corpus, cfg);
  CHECK(r.model.params().get(GnnModel::kDirW).data == fresh.params().get(GnnModel::kDirW).data);
  const auto held = small_corpus(1 + 0x9e3779b9ULL, 30);
  const double acc = direction_accuracy(r.model, held);
  CHECK(std::fabs(acc - 0.125) <= 0.05);
}

TEST_CASE("node embeddings") {
  const auto corpus = small_corpus(4, 2);
  const GnnModel model(quick_link(1).gnn, 9);
  const GraphDoc& gd = corpus[0];
  const Tensor h = embed_nodes(gd.doc, gd.graph, model);
  CHECK(h.rows() == gd.doc.size());
  CHECK(h.cols() == 16);
  CHECK(h.data == embed_nodes(gd.doc, gd.graph, model).data);

  SUBCASE("permuting ids permutes embeddings") {
    std::vector<int> perm(gd.doc.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
    std::mt19937_64 rng(3);
    std::shuffle(perm.begin(), perm.end(), rng);
    const Document p = permuted(gd.doc, perm);
    const Tensor hp = embed_nodes(p, build_graph(p), model);
    for (std::size_t u = 0; u < perm.size(); ++u) {
      for (std::size_t j = 0; j < h.cols(); ++j) CHECK(hp.at(perm[u], j) == doctest::Approx(h.at(u, j)).epsilon(1e-12));
    }
  }
  SUBCASE("an isolated node sees only itself") {
    Document lone = testing::make_doc({{100, 100, 180, 120}});
    lone.segments[0].text = gd.doc.segments[0].text;
    lone.segments[0].tokens = gd.doc.segments[0].tokens;
    const Tensor a = embed_nodes(lone, build_graph(lone), model);
    Document moved = lone;
    moved.segments[0].bbox = {500, 700, 580, 720};  // same size, elsewhere
    const Tensor b = embed_nodes(moved, build_graph(moved), model);
    CHECK(a.data == b.data);
  }
  SUBCASE("mismatched graph") {
    CHECK(error_code([&] { embed_nodes(testing::make_doc({{0, 0, 10, 10}}), gd.graph, model); }) == ErrorCode::GraphDocMismatch);
  }
}

TEST_CASE("BIO tagging and the tag scheme") {
  Document doc = testing::make_doc({{0, 0, 30, 10}, {40, 0, 90, 10}, {0, 20, 10, 30}});
  doc.segments[0].label = "question";
  doc.segments[0].tokens = {{"Due", {0, 0, 14, 10}}, {"Date:", {15, 0, 30, 10}}};
  doc.segments[1].label = "answer";
  doc.segments[1].tokens = {{"12/03", {40, 0, 60, 10}}, {"2019", {61, 0, 75, 10}}, {"net", {76, 0, 90, 10}}};
  doc.segments[2].label = "other";
  CHECK(bio_tags(doc) == std::vector<std::string>{"B-question", "I-question", "B-answer", "I-answer", "I-answer", "O"});
  CHECK(token_alignment(doc) == std::vector<int>{0, 0, 1, 1, 1, 2});

  const TagScheme scheme({"question", "other", "answer"});
  CHECK(scheme.tags() == std::vector<std::string>{"O", "B-answer", "I-answer", "B-question", "I-question"});
  CHECK(scheme.id("I-question") == 4);
  CHECK(error_code([&] { scheme.id("B-header"); }) == ErrorCode::LabelSetMismatch);
}

TEST_CASE("fuse") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  Tensor hl(5, 16), hg(3, 8);
  for (double& x : hl.data) x = u(rng);
  for (double& x : hg.data) x = u(rng);
  const std::vector<int> alignment = {0, 0, 1, 2, 2};
  const FusedTokenMatrix f = fuse(hl, alignment, hg);
  CHECK(f.features.cols() == 24);
  CHECK(f.text_dim == 16);
  CHECK(f.graph_dim == 8);
  for (std::size_t j = 0; j < 8; ++j) {
    CHECK(f.features.at(0, 16 + j) == f.features.at(1, 16 + j));
    CHECK(f.features.at(3, 16 + j) == hg.at(2, j));
  }
  for (std::size_t j = 0; j < 16; ++j) CHECK(f.features.at(4, j) == hl.at(4, j));
  CHECK(error_code([&] { fuse(hl, {0, 0, 1, 2, 3}, hg); }) == ErrorCode::MissingSegmentEmbedding);
  CHECK(error_code([&] { fuse(hl, {0, 0}, hg); }) == ErrorCode::LengthMismatch);
}

TEST_CASE("zero graph features reproduce the text-only head") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1, 1);
  Tensor hl(7, 12);
  for (double& x : hl.data) x = u(rng);
  const IeHead text_only(12, 0, 5, 77);
  const IeHead fused(12, 8, 5, 77);
  const Tensor zeros(3, 8);
  const Tensor fused_logits = fused.logits(fuse(hl, {0, 0, 1, 1, 1, 2, 2}, zeros).features);
  CHECK(fused_logits.data == text_only.logits(hl).data);
  // Suffix rows start at zero.
  const Tensor& w = fused.params().get(IeHead::kWeight);
  for (std::size_t r = 12; r < 20; ++r)
    for (std::size_t c = 0; c < 5; ++c) CHECK(w.at(r, c) == 0.0);
}

TEST_CASE("IE head reaches perfect training accuracy on separable features") {
  const TagScheme scheme({"answer", "question"});
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> noise(-0.2, 0.2);
  std::vector<IeExample> train;
  for (int d = 0; d < 12; ++d) {
    IeExample ex;
    ex.doc_id = "sep" + std::to_string(d);
    const int n = 10;
    ex.h_l = Tensor(n, scheme.size());
    for (int t = 0; t < n; ++t) {
      const int tag = static_cast<int>(rng() % static_cast<std::uint64_t>(scheme.size()));
      ex.tags.push_back(tag);
      ex.alignment.push_back(t);
      for (int j = 0; j < scheme.size(); ++j) ex.h_l.at(t, j) = (j == tag ? 1.0 : 0.0) + noise(rng);
    }
    train.push_back(std::move(ex));
  }
  IeConfig cfg;
  cfg.lr = 1e-2;
  cfg.epochs = 50;
  const auto r = train_ie_head(train, {}, scheme, cfg);
  REQUIRE(r.history.size() == 50);
  CHECK(r.history.back().train_accuracy == 1.0);
}

TEST_CASE("all-O corpus scores zero and is flagged") {
  const TagScheme scheme({"answer"});
  IeExample ex;
  ex.doc_id = "o";
  ex.h_l = Tensor(4, 3, 0.5);
  ex.tags = {0, 0, 0, 0};
  ex.alignment = {0, 1, 2, 3};
  IeConfig cfg;
  cfg.lr = 1e-2;
  cfg.epochs = 30;
  const auto r = train_ie_head({ex}, {ex}, scheme, cfg);
  const EntityMetrics m = r.history.back().eval;
  CHECK(r.head.predict(ex.h_l) == std::vector<int>{0, 0, 0, 0});
  CHECK(m.no_gold_entities);
  CHECK(m.precision == 0.0);
  CHECK(m.recall == 0.0);
  CHECK(m.f1 == 0.0);
}

TEST_CASE("GNN stays frozen unless joint fine-tuning is requested") {
  ExperimentConfig cfg;
  cfg.n_docs = 6;
  cfg.n_eval_docs = 2;
  cfg.link.gnn.hidden_dim = 8;
  const TrialCorpus corpus = synthetic_trial_corpus(cfg, 3);
  const TagScheme scheme({"answer", "other", "question"});
  const TextEmbedder tokens(16, 42);
  const GnnModel initial(cfg.link.gnn, 3);

  IeConfig ie;
  ie.epochs = 3;
  ie.lr = 1e-2;

  GnnModel frozen = initial;
  auto examples = make_ie_examples(corpus.train, scheme, tokens, &frozen);
  const auto fr = train_ie_head(examples, {}, scheme, ie, &frozen);
  CHECK(frozen.params() == initial.params());
  CHECK(fr.head.graph_dim() == 8);

  GnnModel tuned = initial;
  auto joint = make_ie_examples(corpus.train, scheme, tokens, nullptr);
  for (std::size_t i = 0; i < joint.size(); ++i) {
    joint[i].node_inputs = node_features(corpus.train[i].doc, corpus.train[i].graph, tuned.text_embedder());
  }
  ie.joint_finetune = true;
  const auto jr = train_ie_head(joint, {}, scheme, ie, &tuned);
  CHECK(!(tuned.params() == initial.params()));
  // The text block of the head starts identically in both runs; training
  // moves it either way.
  CHECK(!(jr.head.params() == fr.head.params()));

  ie.joint_finetune = true;
  CHECK(error_code([&] { train_ie_head(joint, {}, scheme, ie, nullptr); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("evaluate_entities") {
  SUBCASE("one hit, one spurious") {
    const std::vector<std::string> gold = {"B-question", "I-question", "O", "B-answer", "O"};
    const std::vector<std::string> pred = {"B-question", "I-question", "O", "O", "B-answer"};
    const auto m = evaluate_entities(pred, gold);
    CHECK(m.precision == 0.5);
    CHECK(m.recall == 0.5);
    CHECK(m.f1 == 0.5);
  }
  SUBCASE("perfect") {
    const std::vector<std::string> gold = {"B-answer", "I-answer", "B-answer"};
    const auto m = evaluate_entities(gold, gold);
    CHECK(m.precision == 1.0);
    CHECK(m.recall == 1.0);
    CHECK(m.f1 == 1.0);
    CHECK(m.per_label.at("answer").true_positives == 2);
  }
  SUBCASE("boundary off by one") {
    const std::vector<std::string> gold = {"B-answer", "I-answer", "I-answer", "O"};
    const std::vector<std::string> pred = {"B-answer", "I-answer", "O", "O"};
    const auto m = evaluate_entities(pred, gold);
    CHECK(m.true_positives == 0);
    CHECK(m.predicted == 1);
    CHECK(m.gold == 1);
  }
  SUBCASE("length mismatch") {
    CHECK(error_code([] { evaluate_entities(std::vector<std::string>{"O"}, std::vector<std::string>{}); }) ==
          ErrorCode::LengthMismatch);
  }
  SUBCASE("stray I- opens an entity") {
    CHECK(extract_spans({"O", "I-answer", "I-answer", "I-question"}) ==
          std::vector<EntitySpan>{{1, 3, "answer"}, {3, 4, "question"}});
  }
  SUBCASE("agrees with the reference chunker") {
    std::mt19937_64 rng(12);
    std::vector<std::vector<std::string>> preds, golds;
    for (int i = 0; i < 1000; ++i) {
      const int n = 1 + static_cast<int>(rng() % 25);
      auto gold = random_tags(rng, n);
      auto pred = gold;
      for (auto& t : pred)
        if (rng() % 4 == 0) t = random_tags(rng, 1)[0];
      std::set<std::tuple<int, int, std::string>> got;
      for (const auto& s : extract_spans(gold)) got.insert({s.begin, s.end, s.label});
      CHECK(got == oracle::reference_spans(gold));
      const double f = evaluate_entities(pred, gold).f1;
      CHECK(f == doctest::Approx(oracle::reference_f1({pred}, {gold})).epsilon(1e-12));
      preds.push_back(pred);
      golds.push_back(gold);
    }
    CHECK(evaluate_entities(preds, golds).f1 == doctest::Approx(oracle::reference_f1(preds, golds)).epsilon(1e-12));
  }
}

TEST_CASE("convergence statistics") {
  CHECK(epochs_to_fraction({0.1, 0.5, 0.85, 0.9, 0.92, 0.94}) == 3);
  CHECK(epochs_to_fraction({0.4, 0.4, 0.4}) == 1);
  CHECK(error_code([] { epochs_to_fraction({}); }) == ErrorCode::EmptyHistory);
  const auto rows = convergence_report({{"a", {0.2, 0.8, 1.0}}, {"b", {0.5, 0.5, 0.5}}});
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].epochs_to_threshold == 3);
  CHECK(rows[1].epochs_to_threshold == 1);
  CHECK(error_code([] { convergence_report({{"a", {1.0}}, {"b", {1.0, 2.0}}}); }) == ErrorCode::LengthMismatch);
  CHECK(convergence_table(rows).rfind("arm,epochs_to_90pct_final,final_f1\n", 0) == 0);
  CHECK(curves_csv({{"a", {0.25, 0.5}}}) == "epoch,a\n1,0.250000\n2,0.500000\n");
}

TEST_CASE("paired sign test") {
  const std::vector<double> hi(10, 1.0), lo(10, 0.0);
  const SignTest all = paired_sign_test(hi, lo);
  CHECK(all.wins == 10);
  CHECK(all.p_value == doctest::Approx(1.0 / 1024).epsilon(1e-12));
  const SignTest eight = paired_sign_test({1, 1, 1, 1, 1, 1, 1, 1, 0, 0}, {0, 0, 0, 0, 0, 0, 0, 0, 1, 1});
  CHECK(eight.p_value == doctest::Approx(56.0 / 1024).epsilon(1e-12));
  const SignTest ties = paired_sign_test({1, 1}, {1, 1});
  CHECK(ties.ties == 2);
  CHECK(ties.p_value == 1.0);
}

TEST_CASE("experiment wiring") {
  ExperimentConfig cfg;
  cfg.trials = 2;
  cfg.n_docs = 8;
  cfg.n_eval_docs = 3;
  cfg.link.epochs = 2;
  cfg.link.gnn.hidden_dim = 8;
  cfg.ie.epochs = 3;

  SUBCASE("both arms on one corpus") {
    const ExperimentResult r = run_experiment(cfg);
    REQUIRE(r.trials.size() == 2);
    for (const auto& t : r.trials) {
      CHECK(t.link_history.size() == 2);
      CHECK(t.arm(kFusedArm).consumed_checkpoint);
      CHECK(!t.arm(kTextOnlyArm).consumed_checkpoint);
      CHECK(t.arm(kFusedArm).corpus_digest == t.arm(kTextOnlyArm).corpus_digest);
      CHECK(t.arm(kFusedArm).f1_curve.size() == 3);
      CHECK(t.arm(kFusedArm).loss_curve.size() == 3);
    }
    CHECK(r.arm(kTextOnlyArm).mean_loss_curve.size() == 3);
    CHECK(r.f1_delta_points == doctest::Approx(100 * (r.arm(kFusedArm).mean_f1 - r.arm(kTextOnlyArm).mean_f1)));
    const ExperimentResult again = run_experiment(cfg);
    CHECK(per_trial_csv(again) == per_trial_csv(r));
  }
  SUBCASE("text-only never trains a GNN") {
    cfg.arms = {kTextOnlyArm};
    const ExperimentResult r = run_experiment(cfg);
    for (const auto& t : r.trials) {
      CHECK(t.link_history.empty());
      CHECK(!t.arm(kTextOnlyArm).consumed_checkpoint);
    }
  }
  SUBCASE("arms on different corpora are rejected") {
    TrialResult t;
    t.arms.resize(2);
    t.arms[0].name = kFusedArm;
    t.arms[0].corpus_digest = "a";
    t.arms[1].name = kTextOnlyArm;
    t.arms[1].corpus_digest = "b";
    CHECK(error_code([&] { verify_same_corpus(t); }) == ErrorCode::IntegrityMismatch);
  }
  SUBCASE("bad arm name") {
    cfg.arms = {"graph-only"};
    CHECK(error_code([&] { run_experiment(cfg); }) == ErrorCode::InvalidConfig);
  }
}

}  // TEST_SUITE
