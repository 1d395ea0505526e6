#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "docgraph/doc_model.hpp"
#include "docgraph/geometry.hpp"

namespace docgraph {

struct EdgeFeature {
  int src = 0;
  int dst = 0;
  double d = 0;      // raw box distance
  double e_dis = 0;  // ln(d + 1)
  Sector e_dir = Sector::E;
  double r = 0;  // per-document min-max of e_dis

  friend bool operator==(const EdgeFeature&, const EdgeFeature&) = default;
};

struct DocumentGraph {
  std::string doc_id;
  int node_count = 0;
  std::vector<EdgeFeature> directed_edges;        // D-LoS output, grouped by src, sector order
  std::vector<std::vector<int>> mp_adjacency;     // symmetrised, sorted, no self-loops

  friend bool operator==(const DocumentGraph&, const DocumentGraph&) = default;
};

struct PolarFeature {
  double d = 0;
  double e_dis = 0;
  Sector e_dir = Sector::E;
};

PolarFeature edge_feature(const BBox& src, const BBox& dst);

DocumentGraph build_graph(const Document& doc);

/// Fills r on every directed edge; all zero when every e_dis is equal.
DocumentGraph normalize_r(DocumentGraph graph);

/// Canonical JSON: distances and r written with six decimals, so a second
/// serialisation after parsing is byte-identical to the first.
std::string graph_to_json(const DocumentGraph& graph);
DocumentGraph graph_from_json(std::string_view raw);

}  // namespace docgraph
