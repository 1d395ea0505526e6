// docgraph: build document graphs, train the link-prediction GNN, run the
// fusion experiment, and render graphs for inspection.
//
// Exit status: 0 success, 1 usage, 2 unreadable or invalid input,
// 3 numeric failure during training, 4 integrity failure.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "docgraph/commands.hpp"
#include "docgraph/doc_model.hpp"
#include "docgraph/experiment.hpp"
#include "docgraph/manifest.hpp"

namespace fs = std::filesystem;
using namespace docgraph;

namespace {

constexpr const char* kSeedEnv = "DOCGRAPH_SEED";

void add_gnn_flags(CLI::App* cmd, GnnConfig& g) {
  cmd->add_option("--text-dim", g.text_dim, "Hashed text embedding width")->capture_default_str();
  cmd->add_option("--size-dim", g.size_dim, "Size embedding width")->capture_default_str();
  cmd->add_option("--hidden-dim", g.hidden_dim, "GraphSage hidden width")->capture_default_str();
  cmd->add_option("--layers", g.layers, "GraphSage layers")->capture_default_str();
  cmd->add_option("--hash-seed", g.hash_seed, "Seed of the text hashing")->capture_default_str();
}

int report(const CommandResult& r) {
  for (const auto& e : r.manifest.errors) std::cerr << "docgraph: error: " << e << "\n";
  std::cout << r.summary << "\n";
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Document graphs: D-LoS construction, GraphSage link prediction, and token fusion"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "docgraph 0.1.0");

  // build-graph
  std::vector<std::string> bg_inputs;
  std::string bg_format = "funsd", bg_out;
  bool bg_raw = false;
  auto* bg = app.add_subcommand("build-graph", "Parse documents and write <id>.doc.json / <id>.graph.json");
  bg->add_option("inputs", bg_inputs, "Annotation files or directories")->required();
  bg->add_option("--format", bg_format, "Input format")->check(CLI::IsMember({"funsd", "generic"}))->capture_default_str();
  bg->add_option("--out", bg_out, "Output directory")->required();
  bg->add_flag("--raw-coords", bg_raw, "Keep page coordinates instead of scaling to a 0-1000 grid");

  // train-link
  TrainConfig tl;
  std::string tl_graphs, tl_out;
  auto* tr = app.add_subcommand("train-link", "Train the GNN on link prediction over a graph directory");
  tr->add_option("--graphs", tl_graphs, "Directory written by build-graph")->required();
  tr->add_option("--out", tl_out, "Output directory")->required();
  tr->add_option("--epochs", tl.epochs, "Epochs")->capture_default_str();
  tr->add_option("--lr", tl.lr, "Adam learning rate")->capture_default_str();
  tr->add_option("--batch-size", tl.batch_size, "Documents per optimizer step")->capture_default_str();
  tr->add_option("--lambda", tl.lambda, "Weight of the distance loss; 1 - lambda weights direction")->capture_default_str();
  tr->add_option("--seed", tl.seed, "Seed (default from " + std::string(kSeedEnv) + " when set)")
      ->envname(kSeedEnv)
      ->capture_default_str();
  tr->add_option("--extra-pairs", tl.extra_pair_count, "Random non-edge pairs added per document")->capture_default_str();
  tr->add_flag("--loss-mean", tl.loss_mean, "Average the loss over pairs instead of summing");
  add_gnn_flags(tr, tl.gnn);

  // run-experiment
  ExperimentConfig ex;
  std::string ex_ablation = "both", ex_out;
  auto* re = app.add_subcommand("run-experiment", "Fused vs text-only entity extraction on synthetic forms");
  re->add_option("--out", ex_out, "Output directory")->required();
  re->add_option("--trials", ex.trials, "Number of seeds")->capture_default_str();
  re->add_option("--seed", ex.seed, "First trial seed (default from " + std::string(kSeedEnv) + " when set)")
      ->envname(kSeedEnv)
      ->capture_default_str();
  re->add_option("--ablation", ex_ablation, "Arms to run")
      ->check(CLI::IsMember({"fused", "text-only", "both"}))
      ->capture_default_str();
  re->add_option("--docs", ex.n_docs, "Training documents per trial")->capture_default_str();
  re->add_option("--eval-docs", ex.n_eval_docs, "Held-out documents per trial")->capture_default_str();
  re->add_option("--min-nodes", ex.min_nodes, "Fewest segments per document")->capture_default_str();
  re->add_option("--max-nodes", ex.max_nodes, "Most segments per document")->capture_default_str();
  re->add_option("--token-dim", ex.token_dim, "Token embedding width")->capture_default_str();
  re->add_option("--link-epochs", ex.link.epochs, "Link-prediction epochs")->capture_default_str();
  re->add_option("--link-lr", ex.link.lr, "Link-prediction learning rate")->capture_default_str();
  re->add_option("--link-batch-size", ex.link.batch_size, "Documents per link-prediction step")->capture_default_str();
  re->add_option("--lambda", ex.link.lambda, "Weight of the distance loss")->capture_default_str();
  re->add_option("--extra-pairs", ex.link.extra_pair_count, "Random non-edge pairs per document")->capture_default_str();
  re->add_flag("--loss-mean", ex.link.loss_mean, "Average the link loss over pairs");
  re->add_option("--ie-epochs", ex.ie.epochs, "Entity-extraction epochs")->capture_default_str();
  re->add_option("--ie-lr", ex.ie.lr, "Entity-extraction learning rate")->capture_default_str();
  re->add_option("--ie-batch-size", ex.ie.batch_size, "Documents per entity-extraction step")->capture_default_str();
  re->add_flag("--joint-finetune", ex.ie.joint_finetune, "Update the GNN during entity-extraction training");
  re->add_option("--gnn-lr", ex.ie.gnn_lr, "GNN learning rate when fine-tuning jointly")->capture_default_str();
  add_gnn_flags(re, ex.link.gnn);

  // render-svg
  std::string rs_doc, rs_graph, rs_out, rs_labels = "none";
  bool rs_no_text = false;
  auto* rs = app.add_subcommand("render-svg", "Draw a document's boxes and D-LoS edges as SVG");
  rs->add_option("--doc", rs_doc, "Document JSON")->required();
  rs->add_option("--graph", rs_graph, "Graph JSON")->required();
  rs->add_option("--out", rs_out, "Output directory")->required();
  rs->add_option("--edge-labels", rs_labels, "Label edges with d or e_dis")
      ->check(CLI::IsMember({"none", "d", "e_dis"}))
      ->capture_default_str();
  rs->add_flag("--no-text", rs_no_text, "Omit segment text");

  // generate-corpus
  SyntheticSpec gc;
  std::string gc_out;
  auto* gen = app.add_subcommand("generate-corpus", "Write synthetic key-value forms as generic JSONL");
  gen->add_option("--out", gc_out, "Output directory")->required();
  gen->add_option("--seed", gc.seed, "Seed (default from " + std::string(kSeedEnv) + " when set)")
      ->envname(kSeedEnv)
      ->capture_default_str();
  gen->add_option("--docs", gc.n_docs, "Documents")->capture_default_str();
  gen->add_option("--min-nodes", gc.min_nodes, "Fewest segments per document")->capture_default_str();
  gen->add_option("--max-nodes", gc.max_nodes, "Most segments per document")->capture_default_str();

  // replay
  std::string rp_manifest, rp_out;
  auto* rp = app.add_subcommand("replay", "Re-run a manifest and compare every output digest");
  rp->add_option("manifest", rp_manifest, "manifest.json written by an earlier run")->required();
  rp->add_option("--out", rp_out, "Directory for the reproduced outputs")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (bg->parsed()) {
      ordered_json config;
      config["format"] = bg_format;
      config["normalize"] = !bg_raw;
      std::vector<fs::path> paths(bg_inputs.begin(), bg_inputs.end());
      return report(run_command("build-graph", config, build_graph_inputs(paths, bg_format), bg_out));
    }
    if (tr->parsed()) {
      return report(run_command("train-link", to_json(tl), train_link_inputs(tl_graphs), tl_out));
    }
    if (re->parsed()) {
      if (ex_ablation == "both") {
        ex.arms = {kFusedArm, kTextOnlyArm};
      } else {
        ex.arms = {ex_ablation};
      }
      return report(run_command("run-experiment", to_json(ex), ordered_json::object(), ex_out));
    }
    if (rs->parsed()) {
      ordered_json config;
      config["edge_label"] = rs_labels;
      config["show_text"] = !rs_no_text;
      return report(run_command("render-svg", config, render_svg_inputs(rs_doc, rs_graph), rs_out));
    }
    if (gen->parsed()) {
      ordered_json config;
      config["seed"] = gc.seed;
      config["n_docs"] = gc.n_docs;
      config["min_nodes"] = gc.min_nodes;
      config["max_nodes"] = gc.max_nodes;
      return report(run_command("generate-corpus", config, ordered_json::object(), gc_out));
    }
    if (rp->parsed()) {
      const Manifest recorded = Manifest::parse(read_file(rp_manifest));
      const ReplayReport r = replay(recorded, rp_out);
      for (const auto& m : r.mismatches) std::cerr << "docgraph: mismatch: " << m << "\n";
      if (!r.identical()) {
        std::cout << "replay of " << recorded.command << " differs in " << r.mismatches.size() << " place"
                  << (r.mismatches.size() == 1 ? "" : "s") << "\n";
        return kExitIntegrity;
      }
      const auto n = r.rerun.manifest.outputs.size();
      std::cout << "replay of " << recorded.command << " reproduced " << n << " output" << (n == 1 ? "" : "s")
                << " bit for bit\n";
      return kExitOk;
    }
  } catch (const Error& e) {
    std::cerr << "docgraph: error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "docgraph: error: " << e.what() << "\n";
    return kExitParse;
  }
  return kExitUsage;
}
