#include "docgraph/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

#include "docgraph/doc_model.hpp"
#include "docgraph/experiment.hpp"
#include "docgraph/graph_builder.hpp"
#include "docgraph/link_training.hpp"
#include "docgraph/metrics.hpp"
#include "docgraph/svg.hpp"
#include "docgraph/synthetic.hpp"

namespace docgraph {

namespace fs = std::filesystem;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidConfig:
      return kExitUsage;
    case ErrorCode::NonFiniteLoss:
      return kExitNumeric;
    case ErrorCode::IntegrityMismatch:
      return kExitIntegrity;
    default:
      return kExitParse;
  }
}

namespace {

constexpr const char* kDocSuffix = ".doc.json";
constexpr const char* kGraphSuffix = ".graph.json";

nlohmann::json plain(const ordered_json& j) { return nlohmann::json::parse(j.dump()); }

std::string format(const char* fmt, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, a);
  return buf;
}

// Collects outputs and their digests, then writes the manifest last.
class Run {
 public:
  Run(std::string command, const ordered_json& config, const ordered_json& inputs, fs::path out_dir)
      : out_dir_(std::move(out_dir)) {
    result_.manifest.command = std::move(command);
    result_.manifest.config = config;
    result_.manifest.inputs = inputs;
    std::error_code ec;
    fs::create_directories(out_dir_, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create " + out_dir_.string() + ": " + ec.message());
  }

  void write(const std::string& name, const std::string& bytes) {
    write_file(out_dir_ / name, bytes);
    result_.manifest.add_output(name, bytes);
  }
  void fail(std::string message, int exit_code) {
    result_.manifest.errors.push_back(std::move(message));
    result_.exit_code = std::max(result_.exit_code, exit_code);
  }
  CommandResult finish(std::string summary) {
    result_.summary = std::move(summary);
    write_file(out_dir_ / kManifestFile, result_.manifest.to_string());
    return std::move(result_);
  }

 private:
  fs::path out_dir_;
  CommandResult result_;
};

std::string input_path(const ordered_json& entry, const char* what) {
  if (!entry.is_object() || !entry.contains("path") || !entry["path"].is_string()) {
    throw Error(ErrorCode::InvalidConfig, std::string(what) + " input needs a path");
  }
  return entry["path"].get<std::string>();
}

const ordered_json& field(const ordered_json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw Error(ErrorCode::InvalidConfig, std::string("missing \"") + key + "\"");
  return j[key];
}

// Document ids become file names; keep them to a portable character set.
std::string file_stem(const std::string& doc_id) {
  std::string out;
  for (char c : doc_id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                    c == '_' || c == '.';
    out += ok ? c : '_';
  }
  return out.empty() ? "doc" : out;
}

std::string strip_suffix(const std::string& name, const std::string& suffix) {
  return name.size() > suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0
             ? name.substr(0, name.size() - suffix.size())
             : std::string();
}

}  // namespace

ordered_json file_entry(const fs::path& path) {
  ordered_json e;
  e["path"] = fs::absolute(path).lexically_normal().string();
  e["fnv1a64"] = content_digest(read_file(path));
  return e;
}

ordered_json build_graph_inputs(const std::vector<fs::path>& paths, const std::string& format) {
  const std::set<std::string> extensions =
      format == "generic" ? std::set<std::string>{".jsonl", ".json"} : std::set<std::string>{".json"};
  std::vector<fs::path> files;
  for (const auto& p : paths) {
    if (!fs::is_directory(p)) {
      files.push_back(p);
      continue;
    }
    const fs::path dir = format == "funsd" && fs::is_directory(p / "annotations") ? p / "annotations" : p;
    std::vector<fs::path> found;
    for (const auto& entry : fs::directory_iterator(dir)) {
      const std::string name = entry.path().filename().string();
      if (!entry.is_regular_file() || !extensions.count(entry.path().extension().string())) continue;
      if (name == kManifestFile || !strip_suffix(name, kDocSuffix).empty() || !strip_suffix(name, kGraphSuffix).empty()) {
        continue;
      }
      found.push_back(entry.path());
    }
    std::sort(found.begin(), found.end());
    files.insert(files.end(), found.begin(), found.end());
  }
  ordered_json inputs;
  inputs["files"] = ordered_json::array();
  for (const auto& f : files) {
    ordered_json e;
    e["path"] = fs::absolute(f).lexically_normal().string();
    try {
      e["fnv1a64"] = content_digest(read_file(f));
    } catch (const Error&) {
      e["fnv1a64"] = nullptr;  // reported by the command itself
    }
    inputs["files"].push_back(std::move(e));
  }
  return inputs;
}

ordered_json train_link_inputs(const fs::path& graphs_dir) {
  if (!fs::is_directory(graphs_dir)) throw Error(ErrorCode::Io, graphs_dir.string() + " is not a directory");
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(graphs_dir)) {
    const std::string id = strip_suffix(entry.path().filename().string(), kGraphSuffix);
    if (!id.empty()) ids.push_back(id);
  }
  std::sort(ids.begin(), ids.end());
  ordered_json inputs;
  inputs["graphs_dir"] = fs::absolute(graphs_dir).lexically_normal().string();
  inputs["documents"] = ordered_json::array();
  for (const auto& id : ids) {
    ordered_json d;
    d["id"] = id;
    d["doc"] = file_entry(graphs_dir / (id + kDocSuffix));
    d["graph"] = file_entry(graphs_dir / (id + kGraphSuffix));
    inputs["documents"].push_back(std::move(d));
  }
  return inputs;
}

ordered_json render_svg_inputs(const fs::path& doc, const fs::path& graph) {
  ordered_json inputs;
  inputs["doc"] = file_entry(doc);
  inputs["graph"] = file_entry(graph);
  return inputs;
}

CommandResult build_graph_command(const ordered_json& config, const ordered_json& inputs, const fs::path& out_dir) {
  const std::string fmt = field(config, "format").get<std::string>();
  if (fmt != "funsd" && fmt != "generic") throw Error(ErrorCode::InvalidConfig, "format must be funsd or generic");
  const bool normalize = config.value("normalize", true);
  Run run("build-graph", config, inputs, out_dir);

  std::set<std::string> written;
  long long nodes = 0, edges = 0;
  int built = 0, failed = 0;
  for (const auto& entry : field(inputs, "files")) {
    const fs::path path = input_path(entry, "build-graph");
    try {
      const std::string raw = read_file(path);
      const std::string stem = path.stem().string();
      Document doc = fmt == "funsd" ? parse_funsd(raw, stem) : parse_generic(raw, stem);
      if (normalize) doc = normalize_coords(doc);
      const auto report = validate_document(doc);
      if (!report.ok()) {
        throw Error(ErrorCode::InvalidDocument, report.errors.front().code + ": " + report.errors.front().message);
      }
      const std::string name = file_stem(doc.doc_id);
      if (!written.insert(name).second) throw Error(ErrorCode::DuplicateId, "document id " + doc.doc_id + " repeats");
      const DocumentGraph graph = build_graph(doc);
      run.write(name + kDocSuffix, document_to_json(doc));
      run.write(name + kGraphSuffix, graph_to_json(graph));
      nodes += graph.node_count;
      edges += static_cast<long long>(graph.directed_edges.size());
      ++built;
    } catch (const Error& e) {
      run.fail(path.string() + ": " + e.what(), kExitParse);
      ++failed;
    }
  }
  std::string summary = "built " + std::to_string(built) + " graph" + (built == 1 ? "" : "s") + " (" +
                        std::to_string(nodes) + " nodes, " + std::to_string(edges) + " directed edges)";
  if (failed) summary += "; " + std::to_string(failed) + " input" + (failed == 1 ? "" : "s") + " failed";
  return run.finish(summary);
}

CommandResult train_link_command(const ordered_json& config, const ordered_json& inputs, const fs::path& out_dir) {
  const TrainConfig cfg = train_config_from_json(plain(config));
  cfg.validate();
  std::vector<GraphDoc> corpus;
  for (const auto& d : field(inputs, "documents")) {
    Document doc = document_from_json(read_file(input_path(field(d, "doc"), "doc")));
    DocumentGraph graph = graph_from_json(read_file(input_path(field(d, "graph"), "graph")));
    if (graph.doc_id != doc.doc_id || graph.node_count != static_cast<int>(doc.segments.size())) {
      throw Error(ErrorCode::GraphDocMismatch, "graph " + graph.doc_id + " does not belong to document " + doc.doc_id);
    }
    corpus.push_back(GraphDoc{std::move(doc), std::move(graph)});
  }

  Run run("train-link", to_json(cfg), inputs, out_dir);
  try {
    auto trained = train_link_prediction(corpus, cfg);
    run.write("model.ckpt", save_checkpoint(trained.model.params()));
    run.write("loss_history.csv", loss_history_csv(trained.history));
    const auto& first = trained.history.front();
    const auto& last = trained.history.back();
    return run.finish("trained on " + std::to_string(corpus.size()) + " documents for " +
                      std::to_string(cfg.epochs) + " epochs: joint loss " + format("%.4f", first.joint) + " -> " +
                      format("%.4f", last.joint) + ", direction accuracy " +
                      format("%.3f", last.direction_accuracy));
  } catch (const Error& e) {
    run.fail(e.what(), exit_code_for(e.code()));
    return run.finish(std::string("training failed: ") + e.what());
  }
}

CommandResult run_experiment_command(const ordered_json& config, const ordered_json& inputs, const fs::path& out_dir) {
  const ExperimentConfig cfg = experiment_config_from_json(plain(config));
  cfg.validate();
  const bool uses_gnn = std::find(cfg.arms.begin(), cfg.arms.end(), kFusedArm) != cfg.arms.end();

  ordered_json recorded_inputs = inputs.is_object() ? inputs : ordered_json::object();
  recorded_inputs["corpus"] = "synthetic";
  ordered_json checkpoints = ordered_json::object();
  for (const auto& arm : cfg.arms) {
    checkpoints[arm] = arm == kFusedArm ? ordered_json("trained in-run from the link config, one per trial")
                                        : ordered_json(nullptr);
  }
  recorded_inputs["gnn_checkpoint"] = std::move(checkpoints);
  Run run("run-experiment", to_json(cfg), recorded_inputs, out_dir);

  try {
    const ExperimentResult result = run_experiment(cfg);

    std::vector<std::pair<std::string, std::vector<double>>> curves;
    for (const auto& a : result.arms) curves.emplace_back(a.name, a.mean_curve);
    run.write("per_trial.csv", per_trial_csv(result));
    run.write("curves.csv", curves_csv(curves));
    std::vector<std::pair<std::string, std::vector<double>>> losses;
    for (const auto& a : result.arms) losses.emplace_back(a.name, a.mean_loss_curve);
    run.write("loss_curves.csv", curves_csv(losses));
    run.write("convergence.csv", convergence_table(convergence_report(curves)));

    std::string link_csv = "trial_seed,epoch,pairs,joint_loss,mse,ce,direction_accuracy\n";
    for (const auto& t : result.trials) {
      const std::string csv = loss_history_csv(t.link_history);
      std::size_t pos = csv.find('\n') + 1;
      while (pos < csv.size()) {
        const std::size_t end = csv.find('\n', pos);
        link_csv += std::to_string(t.seed) + "," + csv.substr(pos, end - pos + 1);
        pos = end + 1;
      }
    }
    if (uses_gnn) run.write("link_history.csv", link_csv);

    ordered_json summary;
    summary["trials"] = cfg.trials;
    summary["arms"] = ordered_json::array();
    for (const auto& a : result.arms) {
      ordered_json arm;
      arm["name"] = a.name;
      arm["mean_f1"] = a.mean_f1;
      arm["per_trial_f1"] = a.per_trial_f1;
      arm["epochs_to_90pct_final_mean_curve"] = a.epochs_to_threshold_mean_curve;
      arm["epochs_to_90pct_final_per_trial"] = a.epochs_to_threshold_per_trial;
      arm["consumed_gnn_checkpoint"] =
          std::any_of(result.trials.begin(), result.trials.end(),
                      [&](const TrialResult& t) { return t.arm(a.name).consumed_checkpoint; });
      summary["arms"].push_back(std::move(arm));
    }
    std::string line;
    if (uses_gnn) {
      double heldout = 0;
      for (const auto& t : result.trials) heldout += t.heldout_direction_accuracy / static_cast<double>(cfg.trials);
      summary["heldout_direction_accuracy_mean"] = heldout;
    }
    const bool compared = result.arms.size() == 2 && uses_gnn;
    if (compared) {
      summary["f1_delta_points"] = result.f1_delta_points;
      summary["sign_test"] = {{"wins", result.sign_test.wins},
                              {"losses", result.sign_test.losses},
                              {"ties", result.sign_test.ties},
                              {"p_value", result.sign_test.p_value}};
      summary["convergence_wins"] = result.convergence_wins;
    }
    run.write("summary.json", summary.dump(2) + "\n");

    for (const auto& a : result.arms) {
      if (!line.empty()) line += ", ";
      line += a.name + " F1 " + format("%.4f", a.mean_f1) + " (90% of final at epoch " +
              std::to_string(a.epochs_to_threshold_mean_curve) + ")";
    }
    if (compared) {
      line += "; delta " + format("%+.2f", result.f1_delta_points) + " points, sign test " +
              std::to_string(result.sign_test.wins) + "/" + std::to_string(result.sign_test.losses) + " p=" +
              format("%.4f", result.sign_test.p_value);
    }
    return run.finish(std::to_string(cfg.trials) + " trials: " + line);
  } catch (const Error& e) {
    run.fail(e.what(), exit_code_for(e.code()));
    return run.finish(std::string("experiment failed: ") + e.what());
  }
}

CommandResult render_svg_command(const ordered_json& config, const ordered_json& inputs, const fs::path& out_dir) {
  SvgOptions options;
  const std::string label = config.value("edge_label", std::string("none"));
  if (label == "d") {
    options.edge_label = EdgeLabel::Distance;
  } else if (label == "e_dis") {
    options.edge_label = EdgeLabel::LogDistance;
  } else if (label != "none") {
    throw Error(ErrorCode::InvalidConfig, "edge_label must be none, d or e_dis");
  }
  options.show_text = config.value("show_text", true);
  const Document doc = document_from_json(read_file(input_path(field(inputs, "doc"), "doc")));
  const DocumentGraph graph = graph_from_json(read_file(input_path(field(inputs, "graph"), "graph")));
  const std::string svg = render_svg(doc, graph, options);
  Run run("render-svg", config, inputs, out_dir);
  const std::string name = file_stem(doc.doc_id) + ".svg";
  run.write(name, svg);
  return run.finish("rendered " + name + " (" + std::to_string(doc.segments.size()) + " boxes, " +
                    std::to_string(graph.directed_edges.size()) + " arrows)");
}

CommandResult generate_corpus_command(const ordered_json& config, const ordered_json& inputs,
                                      const fs::path& out_dir) {
  SyntheticSpec spec;
  spec.seed = config.value("seed", spec.seed);
  spec.n_docs = config.value("n_docs", spec.n_docs);
  spec.min_nodes = config.value("min_nodes", spec.min_nodes);
  spec.max_nodes = config.value("max_nodes", spec.max_nodes);
  const auto docs = generate_synthetic_corpus(spec);
  ordered_json resolved;
  resolved["seed"] = spec.seed;
  resolved["n_docs"] = spec.n_docs;
  resolved["min_nodes"] = spec.min_nodes;
  resolved["max_nodes"] = spec.max_nodes;
  Run run("generate-corpus", resolved, inputs, out_dir);
  long long nodes = 0;
  for (const auto& d : docs) {
    run.write(file_stem(d.doc_id) + ".jsonl", serialize_generic(d));
    nodes += static_cast<long long>(d.segments.size());
  }
  return run.finish("generated " + std::to_string(docs.size()) + " documents (" + std::to_string(nodes) +
                    " segments)");
}

CommandResult run_command(const std::string& command, const ordered_json& config, const ordered_json& inputs,
                          const fs::path& out_dir) {
  using Fn = CommandResult (*)(const ordered_json&, const ordered_json&, const fs::path&);
  static const std::map<std::string, Fn> commands = {
      {"build-graph", build_graph_command},   {"train-link", train_link_command},
      {"run-experiment", run_experiment_command}, {"render-svg", render_svg_command},
      {"generate-corpus", generate_corpus_command},
  };
  const auto it = commands.find(command);
  if (it == commands.end()) throw Error(ErrorCode::InvalidConfig, "unknown command " + command);
  try {
    return it->second(config, inputs, out_dir);
  } catch (const Error& e) {
    // Failed before any output: still leave a manifest behind.
    CommandResult failed;
    failed.manifest.command = command;
    failed.manifest.config = config;
    failed.manifest.inputs = inputs;
    failed.manifest.errors.push_back(e.what());
    failed.exit_code = exit_code_for(e.code());
    failed.summary = command + " failed: " + e.what();
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (!ec) write_file(out_dir / kManifestFile, failed.manifest.to_string());
    return failed;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, command + ": " + e.what());
  }
}

namespace {

void check_inputs(const ordered_json& j, std::vector<std::string>& mismatches) {
  if (j.is_object()) {
    if (j.contains("path") && j.contains("fnv1a64") && j["path"].is_string() && j["fnv1a64"].is_string()) {
      const std::string path = j["path"].get<std::string>();
      std::string now;
      try {
        now = content_digest(read_file(path));
      } catch (const Error&) {
        now = "unreadable";
      }
      if (now != j["fnv1a64"].get<std::string>()) mismatches.push_back("input " + path + " changed since the run");
      return;
    }
    for (const auto& [key, value] : j.items()) check_inputs(value, mismatches);
  } else if (j.is_array()) {
    for (const auto& value : j) check_inputs(value, mismatches);
  }
}

}  // namespace

ReplayReport replay(const Manifest& recorded, const fs::path& out_dir) {
  ReplayReport report;
  check_inputs(recorded.inputs, report.mismatches);
  report.rerun = run_command(recorded.command, recorded.config, recorded.inputs, out_dir);

  std::map<std::string, std::string> before(recorded.outputs.begin(), recorded.outputs.end());
  std::map<std::string, std::string> after(report.rerun.manifest.outputs.begin(),
                                           report.rerun.manifest.outputs.end());
  for (const auto& [path, digest] : before) {
    const auto it = after.find(path);
    if (it == after.end()) {
      report.mismatches.push_back("output " + path + " was not reproduced");
    } else if (it->second != digest) {
      report.mismatches.push_back("output " + path + " differs (" + digest + " recorded, " + it->second + " now)");
    }
  }
  for (const auto& [path, digest] : after) {
    if (!before.count(path)) report.mismatches.push_back("output " + path + " is new");
  }
  return report;
}

}  // namespace docgraph
