#pragma once

#include <array>
#include <string>
#include <string_view>

#include "docgraph/doc_model.hpp"
#include "docgraph/graph_builder.hpp"

namespace docgraph {

enum class EdgeLabel { None, Distance, LogDistance };

struct SvgOptions {
  EdgeLabel edge_label = EdgeLabel::None;
  bool show_text = true;
};

/// Fixed colour per sector, E through SE.
const std::array<std::string_view, kSectorCount>& sector_palette();

/// Boxes to scale on the document's page, one arrow per directed D-LoS edge
/// coloured by sector, and a sector legend. Output is deterministic.
/// Throws GraphDocMismatch when the graph was not built from `doc`.
std::string render_svg(const Document& doc, const DocumentGraph& graph, const SvgOptions& options = {});

}  // namespace docgraph
