#include "docgraph/graph_builder.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "docgraph/error.hpp"
#include "json.hpp"

namespace docgraph {

PolarFeature edge_feature(const BBox& src, const BBox& dst) {
  PolarFeature f;
  f.e_dir = direction_sector(src, dst);
  f.d = rect_distance(src, dst);
  f.e_dis = std::log(f.d + 1.0);
  return f;
}

DocumentGraph normalize_r(DocumentGraph graph) {
  if (graph.directed_edges.empty()) return graph;
  auto [lo, hi] = std::minmax_element(graph.directed_edges.begin(), graph.directed_edges.end(),
                                      [](const auto& a, const auto& b) { return a.e_dis < b.e_dis; });
  const double min_e = lo->e_dis;
  const double span = hi->e_dis - min_e;
  for (auto& e : graph.directed_edges) e.r = span > 0 ? (e.e_dis - min_e) / span : 0.0;
  return graph;
}

DocumentGraph build_graph(const Document& doc) {
  if (doc.segments.empty()) throw Error(ErrorCode::EmptyDocument, doc.doc_id);
  DocumentGraph graph;
  graph.doc_id = doc.doc_id;
  graph.node_count = static_cast<int>(doc.segments.size());

  std::vector<std::set<int>> adjacency(doc.segments.size());
  for (int u = 0; u < graph.node_count; ++u) {
    const DlosResult nbrs = dlos_neighbors(u, doc);
    for (int k = 0; k < kSectorCount; ++k) {
      if (!nbrs.sectors[k]) continue;
      const int v = nbrs.sectors[k]->target_id;
      const auto f = edge_feature(doc.segments[u].bbox, doc.segments[v].bbox);
      graph.directed_edges.push_back(EdgeFeature{u, v, f.d, f.e_dis, f.e_dir, 0.0});
      adjacency[u].insert(v);
      adjacency[v].insert(u);
    }
  }
  graph.mp_adjacency.reserve(adjacency.size());
  for (const auto& a : adjacency) graph.mp_adjacency.emplace_back(a.begin(), a.end());
  return normalize_r(std::move(graph));
}

namespace {

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  std::string s = buf;
  if (s == "-0.000000") s = "0.000000";
  return s;
}

}  // namespace

std::string graph_to_json(const DocumentGraph& graph) {
  std::string out = "{\n";
  out += "  \"doc_id\": " + nlohmann::json(graph.doc_id).dump() + ",\n";
  out += "  \"node_count\": " + std::to_string(graph.node_count) + ",\n";
  out += "  \"directed_edges\": [";
  for (std::size_t i = 0; i < graph.directed_edges.size(); ++i) {
    const auto& e = graph.directed_edges[i];
    out += i == 0 ? "\n" : ",\n";
    out += "    {\"src\": " + std::to_string(e.src) + ", \"dst\": " + std::to_string(e.dst) +
           ", \"d\": " + fixed6(e.d) + ", \"e_dis\": " + fixed6(e.e_dis) +
           ", \"e_dir\": " + std::to_string(sector_index(e.e_dir)) + ", \"r\": " + fixed6(e.r) + "}";
  }
  out += graph.directed_edges.empty() ? "],\n" : "\n  ],\n";
  out += "  \"mp_adjacency\": [";
  for (std::size_t u = 0; u < graph.mp_adjacency.size(); ++u) {
    out += u == 0 ? "\n    [" : ",\n    [";
    const auto& nbrs = graph.mp_adjacency[u];
    for (std::size_t k = 0; k < nbrs.size(); ++k) {
      if (k) out += ", ";
      out += std::to_string(nbrs[k]);
    }
    out += "]";
  }
  out += graph.mp_adjacency.empty() ? "]\n" : "\n  ]\n";
  out += "}\n";
  return out;
}

DocumentGraph graph_from_json(std::string_view raw) {
  using json = nlohmann::json;
  json j;
  try {
    j = json::parse(raw);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::MalformedJson, e.what());
  }
  for (const char* field : {"doc_id", "node_count", "directed_edges", "mp_adjacency"}) {
    if (!j.contains(field)) throw Error(ErrorCode::MissingField, field);
  }
  DocumentGraph g;
  try {
    g.doc_id = j["doc_id"].get<std::string>();
    g.node_count = j["node_count"].get<int>();
    for (const auto& e : j["directed_edges"]) {
      EdgeFeature f;
      f.src = e.at("src").get<int>();
      f.dst = e.at("dst").get<int>();
      f.d = e.at("d").get<double>();
      f.e_dis = e.at("e_dis").get<double>();
      f.e_dir = sector_from_index(e.at("e_dir").get<int>());
      f.r = e.at("r").get<double>();
      if (f.src < 0 || f.src >= g.node_count || f.dst < 0 || f.dst >= g.node_count) {
        throw Error(ErrorCode::MalformedJson, "edge endpoint out of range");
      }
      g.directed_edges.push_back(f);
    }
    g.mp_adjacency = j["mp_adjacency"].get<std::vector<std::vector<int>>>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedJson, e.what());
  }
  if (static_cast<int>(g.mp_adjacency.size()) != g.node_count) {
    throw Error(ErrorCode::MalformedJson, "mp_adjacency length differs from node_count");
  }
  return g;
}

}  // namespace docgraph
