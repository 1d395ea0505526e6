#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "docgraph/commands.hpp"
#include "docgraph/doc_model.hpp"
#include "docgraph/encoder.hpp"
#include "docgraph/geometry.hpp"
#include "docgraph/graph_builder.hpp"
#include "docgraph/link_training.hpp"
#include "docgraph/manifest.hpp"
#include "docgraph/metrics.hpp"
#include "docgraph/svg.hpp"
#include "docgraph/synthetic.hpp"

namespace py = pybind11;
using namespace docgraph;

namespace {

py::dict history_row(const EpochStats& e) {
  py::dict d;
  d["epoch"] = e.epoch;
  d["pairs"] = e.pairs;
  d["joint"] = e.joint;
  d["mse"] = e.mse;
  d["ce"] = e.ce;
  d["direction_accuracy"] = e.direction_accuracy;
  return d;
}

py::dict metrics_dict(const EntityMetrics& m) {
  py::dict d;
  d["precision"] = m.precision;
  d["recall"] = m.recall;
  d["f1"] = m.f1;
  d["true_positives"] = m.true_positives;
  d["predicted"] = m.predicted;
  d["gold"] = m.gold;
  d["no_gold_entities"] = m.no_gold_entities;
  return d;
}

std::vector<std::vector<double>> rows(const Tensor& t) {
  std::vector<std::vector<double>> out(t.rows());
  for (std::size_t r = 0; r < t.rows(); ++r) {
    const auto row = t.row(r);
    out[r].assign(row.begin(), row.end());
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_docgraph, m) {
  m.doc() = "Document layout graphs, GraphSage link prediction and entity tagging";

  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error_type;
  error_type.call_once_and_store_result([&]() {
    return py::object(py::reinterpret_steal<py::object>(
        PyErr_NewException("docgraph._docgraph.DocgraphError", PyExc_RuntimeError, nullptr)));
  });
  m.attr("DocgraphError") = error_type.get_stored();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object type = error_type.get_stored();
      py::object inst = type(e.what());
      inst.attr("code") = std::string(error_code_name(e.code()));
      PyErr_SetObject(type.ptr(), inst.ptr());
    }
  });

  py::class_<BBox>(m, "BBox")
      .def(py::init<>())
      .def(py::init([](double x1, double y1, double x2, double y2) { return BBox{x1, y1, x2, y2}; }))
      .def(py::init([](const std::array<double, 4>& c) { return BBox{c[0], c[1], c[2], c[3]}; }))
      .def_readwrite("x1", &BBox::x1)
      .def_readwrite("y1", &BBox::y1)
      .def_readwrite("x2", &BBox::x2)
      .def_readwrite("y2", &BBox::y2)
      .def_property_readonly("width", &BBox::width)
      .def_property_readonly("height", &BBox::height)
      .def("__eq__", [](const BBox& a, const BBox& b) { return a == b; })
      .def("__iter__", [](const BBox& b) { return py::iter(py::make_tuple(b.x1, b.y1, b.x2, b.y2)); })
      .def("__repr__", [](const BBox& b) {
        return "BBox(" + std::to_string(b.x1) + ", " + std::to_string(b.y1) + ", " + std::to_string(b.x2) + ", " +
               std::to_string(b.y2) + ")";
      });
  py::implicitly_convertible<py::tuple, BBox>();
  py::implicitly_convertible<py::list, BBox>();

  py::class_<Token>(m, "Token")
      .def(py::init<>())
      .def_readwrite("text", &Token::text)
      .def_readwrite("bbox", &Token::bbox);

  py::class_<Segment>(m, "Segment")
      .def(py::init<>())
      .def_readwrite("id", &Segment::id)
      .def_readwrite("text", &Segment::text)
      .def_readwrite("bbox", &Segment::bbox)
      .def_readwrite("tokens", &Segment::tokens)
      .def_readwrite("label", &Segment::label);

  py::class_<PageSize>(m, "PageSize")
      .def(py::init<>())
      .def_readwrite("width", &PageSize::width)
      .def_readwrite("height", &PageSize::height);

  py::class_<Document>(m, "Document")
      .def(py::init<>())
      .def_readwrite("doc_id", &Document::doc_id)
      .def_readwrite("segments", &Document::segments)
      .def_readwrite("page_size", &Document::page_size)
      .def_readwrite("label_set", &Document::label_set)
      .def("__len__", &Document::size)
      .def("__eq__", [](const Document& a, const Document& b) { return a == b; });

  m.def("parse_funsd", [](const std::string& raw, const std::string& doc_id) { return parse_funsd(raw, doc_id); },
        py::arg("raw"), py::arg("doc_id") = "doc");
  m.def("parse_generic", [](const std::string& raw, const std::string& doc_id) { return parse_generic(raw, doc_id); },
        py::arg("raw"), py::arg("doc_id") = "doc");
  m.def("serialize_generic", &serialize_generic);
  m.def("document_to_json", &document_to_json);
  m.def("document_from_json", [](const std::string& raw) { return document_from_json(raw); });
  m.def("normalize_coords", &normalize_coords);
  m.def("load_funsd_split", &load_funsd_split);
  m.def("collect_labels", &collect_labels);
  m.def("validate_document", [](const Document& doc) {
    const ValidationReport r = validate_document(doc);
    py::dict d;
    auto list = [](const std::vector<Finding>& fs) {
      py::list out;
      for (const auto& f : fs) out.append(py::make_tuple(f.code, f.message));
      return out;
    };
    d["errors"] = list(r.errors);
    d["warnings"] = list(r.warnings);
    return d;
  });

  py::enum_<Sector>(m, "Sector")
      .value("E", Sector::E)
      .value("NE", Sector::NE)
      .value("N", Sector::N)
      .value("NW", Sector::NW)
      .value("W", Sector::W)
      .value("SW", Sector::SW)
      .value("S", Sector::S)
      .value("SE", Sector::SE);

  m.def("rect_distance", &rect_distance);
  m.def("direction_sector", &direction_sector);
  auto neighbours = [](DlosResult (*fn)(int, const Document&)) {
    return [fn](int u, const Document& doc) {
      const DlosResult r = fn(u, doc);
      std::vector<std::optional<std::pair<int, double>>> out;
      for (const auto& n : r.sectors) {
        out.push_back(n ? std::optional<std::pair<int, double>>({n->target_id, n->distance}) : std::nullopt);
      }
      return out;
    };
  };
  m.def("dlos_neighbors", neighbours(&dlos_neighbors), py::arg("u"), py::arg("doc"),
        "Nearest segment per sector as (target_id, distance) or None, indexed E through SE.");
  m.def("dlos_brute_force", neighbours(&dlos_brute_force), py::arg("u"), py::arg("doc"));

  py::class_<EdgeFeature>(m, "EdgeFeature")
      .def_readonly("src", &EdgeFeature::src)
      .def_readonly("dst", &EdgeFeature::dst)
      .def_readonly("d", &EdgeFeature::d)
      .def_readonly("e_dis", &EdgeFeature::e_dis)
      .def_readonly("e_dir", &EdgeFeature::e_dir)
      .def_readonly("r", &EdgeFeature::r);

  py::class_<DocumentGraph>(m, "DocumentGraph")
      .def_readonly("doc_id", &DocumentGraph::doc_id)
      .def_readonly("node_count", &DocumentGraph::node_count)
      .def_readonly("directed_edges", &DocumentGraph::directed_edges)
      .def_readonly("mp_adjacency", &DocumentGraph::mp_adjacency);

  m.def("build_graph", &build_graph);
  m.def("graph_to_json", &graph_to_json);
  m.def("graph_from_json", [](const std::string& raw) { return graph_from_json(raw); });

  py::class_<TextEmbedder>(m, "TextEmbedder")
      .def(py::init<int, std::uint64_t>(), py::arg("dim") = 64, py::arg("seed") = 42)
      .def("bucket", &TextEmbedder::bucket)
      .def("embed", [](const TextEmbedder& e, const std::vector<std::string>& tokens) { return embed_text(tokens, e); });

  m.def("generate_synthetic_corpus",
        [](std::uint64_t seed, int n_docs, int min_nodes, int max_nodes) {
          return generate_synthetic_corpus(SyntheticSpec{seed, n_docs, min_nodes, max_nodes});
        },
        py::arg("seed") = 1, py::arg("n_docs") = 100, py::arg("min_nodes") = 20, py::arg("max_nodes") = 40);

  py::class_<LinkTrainResult>(m, "LinkTrainResult")
      .def_property_readonly("history",
                             [](const LinkTrainResult& r) {
                               py::list out;
                               for (const auto& e : r.history) out.append(history_row(e));
                               return out;
                             })
      .def("checkpoint", [](const LinkTrainResult& r) { return save_checkpoint(r.model.params()); })
      .def("embed_nodes",
           [](const LinkTrainResult& r, const Document& doc, const DocumentGraph& graph) {
             return rows(embed_nodes(doc, graph, r.model));
           })
      .def("direction_accuracy", [](const LinkTrainResult& r, const std::vector<Document>& docs) {
        return direction_accuracy(r.model, build_corpus_graphs(docs));
      });

  m.def("_train_link",
        [](const std::vector<Document>& docs, const std::string& config_json) {
          const TrainConfig cfg = train_config_from_json(nlohmann::json::parse(config_json));
          const auto corpus = build_corpus_graphs(docs);
          py::gil_scoped_release release;
          return train_link_prediction(corpus, cfg);
        });

  m.def("extract_spans", [](const std::vector<std::string>& tags) {
    py::list out;
    for (const auto& s : extract_spans(tags)) out.append(py::make_tuple(s.begin, s.end, s.label));
    return out;
  });
  m.def("evaluate_entities", [](const std::vector<std::vector<std::string>>& pred,
                                const std::vector<std::vector<std::string>>& gold) {
    return metrics_dict(evaluate_entities(pred, gold));
  });

  m.def("render_svg",
        [](const Document& doc, const DocumentGraph& graph, const std::string& edge_label, bool show_text) {
          SvgOptions o;
          o.show_text = show_text;
          if (edge_label == "d") {
            o.edge_label = EdgeLabel::Distance;
          } else if (edge_label == "e_dis") {
            o.edge_label = EdgeLabel::LogDistance;
          } else if (edge_label != "none") {
            throw Error(ErrorCode::InvalidConfig, "edge_label must be none, d or e_dis");
          }
          return render_svg(doc, graph, o);
        },
        py::arg("doc"), py::arg("graph"), py::arg("edge_label") = "none", py::arg("show_text") = true);

  m.def("_run_command",
        [](const std::string& command, const std::string& config, const std::string& inputs,
           const std::filesystem::path& out_dir) {
          const ordered_json c = ordered_json::parse(config);
          const ordered_json i = ordered_json::parse(inputs);
          CommandResult r;
          {
            py::gil_scoped_release release;
            r = run_command(command, c, i, out_dir);
          }
          return py::make_tuple(r.exit_code, r.summary, r.manifest.to_string());
        });
  m.def("_replay", [](const std::string& manifest, const std::filesystem::path& out_dir) {
    const ReplayReport r = replay(Manifest::parse(manifest), out_dir);
    return py::make_tuple(r.rerun.exit_code, r.mismatches);
  });
}
