#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "docgraph/commands.hpp"
#include "docgraph/svg.hpp"
#include "support.hpp"

using namespace docgraph;
using testing::error_code;
namespace fs = std::filesystem;

namespace {

std::size_t count(const std::string& haystack, const std::string& needle) {
  std::size_t n = 0;
  for (std::size_t pos = haystack.find(needle); pos != std::string::npos; pos = haystack.find(needle, pos + 1)) ++n;
  return n;
}

std::string between(const std::string& s, const std::string& open, const std::string& close) {
  const auto a = s.find(open);
  REQUIRE(a != std::string::npos);
  const auto b = s.find(close, a);
  REQUIRE(b != std::string::npos);
  return s.substr(a, b - a);
}

std::vector<fs::path> files_with_suffix(const fs::path& dir, const std::string& suffix) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (name.size() >= suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
      out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

ordered_json obj(std::initializer_list<std::pair<const std::string, ordered_json>> kv) {
  ordered_json j = ordered_json::object();
  for (const auto& [k, v] : kv) j[k] = v;
  return j;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("render_svg structure") {
  const Document doc = testing::row_document();
  const DocumentGraph g = build_graph(doc);
  const std::string svg = render_svg(doc, g);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(count(between(svg, "<g class=\"segments\">", "</g>"), "<rect") == 3);
  CHECK(count(between(svg, "<g class=\"edges\">", "</g>"), "<line") == 4);
  CHECK(count(between(svg, "<g class=\"legend\">", "</g>"), "<rect") == 8);
  CHECK(svg == render_svg(doc, g));
  CHECK(sector_palette()[0] != sector_palette()[1]);

  SvgOptions labelled;
  labelled.edge_label = EdgeLabel::Distance;
  CHECK(render_svg(doc, g, labelled).find(">30.00<") != std::string::npos);

  const Document lone = testing::make_doc({{0, 0, 10, 10}});
  const std::string one = render_svg(lone, build_graph(lone));
  CHECK(count(between(one, "<g class=\"segments\">", "</g>"), "<rect") == 1);
  CHECK(count(one, "<line") == 0);
  CHECK(one.find("class=\"legend\"") != std::string::npos);

  CHECK(error_code([&] { render_svg(lone, g); }) == ErrorCode::GraphDocMismatch);
}

TEST_CASE("exit codes") {
  CHECK(exit_code_for(ErrorCode::InvalidConfig) == kExitUsage);
  CHECK(exit_code_for(ErrorCode::MalformedJson) == kExitParse);
  CHECK(exit_code_for(ErrorCode::DuplicateId) == kExitParse);
  CHECK(exit_code_for(ErrorCode::NonFiniteLoss) == kExitNumeric);
  CHECK(exit_code_for(ErrorCode::IntegrityMismatch) == kExitIntegrity);
  CHECK(error_code([] { run_command("no-such-command", {}, {}, testing::scratch_dir("unknown")); }) ==
        ErrorCode::InvalidConfig);
}

TEST_CASE("generate, build, train and render") {
  const fs::path root = testing::scratch_dir("flow");
  const auto gen = run_command("generate-corpus", obj({{"seed", 3}, {"n_docs", 4}}), ordered_json::object(),
                               root / "corpus");
  REQUIRE(gen.exit_code == kExitOk);
  const auto docs = files_with_suffix(root / "corpus", ".jsonl");
  REQUIRE(docs.size() == 4);
  CHECK(gen.manifest.outputs.size() == 4);

  const auto built = run_command("build-graph", obj({{"format", "generic"}}), build_graph_inputs(docs, "generic"),
                                 root / "graphs");
  REQUIRE(built.exit_code == kExitOk);
  CHECK(files_with_suffix(root / "graphs", ".graph.json").size() == 4);
  CHECK(files_with_suffix(root / "graphs", ".doc.json").size() == 4);
  const Manifest on_disk = Manifest::parse(read_file(root / "graphs" / kManifestFile));
  CHECK(on_disk.to_string() == built.manifest.to_string());

  ordered_json train_cfg = obj({{"epochs", 2}, {"seed", 5}});
  const auto trained = run_command("train-link", train_cfg, train_link_inputs(root / "graphs"), root / "model");
  REQUIRE(trained.exit_code == kExitOk);
  CHECK(fs::exists(root / "model" / "model.ckpt"));
  CHECK(fs::exists(root / "model" / "loss_history.csv"));
  CHECK(trained.manifest.config["lambda"].get<double>() == 0.5);
  CHECK(trained.manifest.config["batch_size"].get<int>() == 6);
  CHECK(trained.manifest.config["lr"].get<double>() == 1e-3);

  const fs::path first = files_with_suffix(root / "graphs", ".doc.json").front();
  std::string graph_name = first.filename().string();
  graph_name.replace(graph_name.size() - 9, 9, ".graph.json");
  const auto svg = run_command("render-svg", obj({{"edge_label", "e_dis"}}),
                               render_svg_inputs(first, root / "graphs" / graph_name), root / "svg");
  REQUIRE(svg.exit_code == kExitOk);
  REQUIRE(svg.manifest.outputs.size() == 1);
  CHECK(read_file(root / "svg" / svg.manifest.outputs[0].first).find("<svg") == 0);

  SUBCASE("replay reproduces every output") {
    for (const auto& [dir, again] : {std::pair{"corpus", "corpus2"}, std::pair{"graphs", "graphs2"},
                                     std::pair{"model", "model2"}, std::pair{"svg", "svg2"}}) {
      const Manifest m = Manifest::parse(read_file(root / dir / kManifestFile));
      const ReplayReport r = replay(m, root / again);
      CHECK_MESSAGE(r.identical(), dir);
      CHECK(r.rerun.exit_code == kExitOk);
    }
  }
  SUBCASE("replay notices a changed input") {
    const Manifest m = Manifest::parse(read_file(root / "svg" / kManifestFile));
    write_file(first, read_file(first) + " ");
    CHECK(!replay(m, root / "svg3").identical());
  }
  SUBCASE("a different seed gives a different model") {
    train_cfg["seed"] = 6;
    const auto other = run_command("train-link", train_cfg, train_link_inputs(root / "graphs"), root / "model6");
    CHECK(read_file(root / "model6" / "model.ckpt") != read_file(root / "model" / "model.ckpt"));
    CHECK(other.manifest.config["seed"].get<int>() == 6);
  }
}

TEST_CASE("build-graph keeps going past a bad input") {
  const fs::path root = testing::scratch_dir("partial");
  fs::create_directories(root / "in");
  write_file(root / "in" / "good.jsonl", serialize_generic(testing::row_document()));
  write_file(root / "in" / "bad.jsonl", "{\"id\": 0, \"text\": \"x\"}\n");  // no box
  const auto r = run_command("build-graph", obj({{"format", "generic"}}),
                             build_graph_inputs({root / "in"}, "generic"), root / "out");
  CHECK(r.exit_code == kExitParse);
  REQUIRE(r.manifest.errors.size() == 1);
  CHECK(r.manifest.errors[0].find("bad.jsonl") != std::string::npos);
  CHECK(files_with_suffix(root / "out", ".graph.json").size() == 1);
  CHECK(fs::exists(root / "out" / kManifestFile));
}

TEST_CASE("train-link reports divergence through its exit code") {
  const fs::path root = testing::scratch_dir("diverge");
  run_command("generate-corpus", obj({{"seed", 1}, {"n_docs", 2}}), ordered_json::object(), root / "corpus");
  run_command("build-graph", obj({{"format", "generic"}}),
              build_graph_inputs({root / "corpus"}, "generic"), root / "graphs");
  const auto r = run_command("train-link", obj({{"epochs", 3}, {"lr", 1e200}}), train_link_inputs(root / "graphs"),
                             root / "model");
  CHECK(r.exit_code == kExitNumeric);
  CHECK(!r.manifest.errors.empty());
  CHECK(fs::exists(root / "model" / kManifestFile));
}

TEST_CASE("text-only experiment records that no checkpoint was used") {
  const fs::path root = testing::scratch_dir("text_only");
  ordered_json cfg = obj({{"trials", 1}, {"n_docs", 4}, {"n_eval_docs", 2}});
  cfg["arms"] = ordered_json::array({"text-only"});
  cfg["ie"] = obj({{"epochs", 2}});
  const auto r = run_command("run-experiment", cfg, ordered_json::object(), root);
  REQUIRE(r.exit_code == kExitOk);
  CHECK(r.manifest.inputs["gnn_checkpoint"]["text-only"].is_null());
  const auto summary = nlohmann::json::parse(read_file(root / "summary.json"));
  CHECK(summary["arms"][0]["consumed_gnn_checkpoint"] == false);
  CHECK(!fs::exists(root / "link_history.csv"));
}

TEST_CASE("bad configuration is a usage error") {
  const fs::path root = testing::scratch_dir("usage");
  const auto r = run_command("train-link", obj({{"lambda", 2.0}}), obj({{"documents", ordered_json::array()}}),
                             root);
  CHECK(r.exit_code == kExitUsage);
  const auto s = run_command("render-svg", obj({{"edge_label", "angle"}}), ordered_json::object(), root / "svg");
  CHECK(s.exit_code == kExitUsage);
}

}  // TEST_SUITE
