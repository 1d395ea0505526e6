#include "docgraph/svg.hpp"

#include <cstdio>

#include "docgraph/error.hpp"

namespace docgraph {

const std::array<std::string_view, kSectorCount>& sector_palette() {
  static constexpr std::array<std::string_view, kSectorCount> palette = {
      "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf"};
  return palette;
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_svg(const Document& doc, const DocumentGraph& graph, const SvgOptions& options) {
  if (graph.doc_id != doc.doc_id || graph.node_count != static_cast<int>(doc.segments.size())) {
    throw Error(ErrorCode::GraphDocMismatch, "graph " + graph.doc_id + " (" + std::to_string(graph.node_count) +
                                                 " nodes) does not match document " + doc.doc_id + " (" +
                                                 std::to_string(doc.segments.size()) + " segments)");
  }
  const double w = doc.page_size.width;
  const double h = doc.page_size.height;
  const double legend_h = 30;
  const auto& palette = sector_palette();

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) + "\" height=\"" + num(h + legend_h) +
         "\" viewBox=\"0 0 " + num(w) + " " + num(h + legend_h) + "\">\n";
  out += "<defs>\n";
  for (int k = 0; k < kSectorCount; ++k) {
    out += "  <marker id=\"arrow" + std::to_string(k) +
           "\" viewBox=\"0 0 10 10\" refX=\"10\" refY=\"5\" markerWidth=\"6\" markerHeight=\"6\" orient=\"auto\">"
           "<path d=\"M0,0 L10,5 L0,10 z\" fill=\"" + std::string(palette[static_cast<std::size_t>(k)]) +
           "\"/></marker>\n";
  }
  out += "</defs>\n";
  out += "<rect x=\"0\" y=\"0\" width=\"" + num(w) + "\" height=\"" + num(h) + "\" fill=\"white\" stroke=\"#999\"/>\n";

  out += "<g class=\"segments\">\n";
  for (const auto& s : doc.segments) {
    const BBox& b = s.bbox;
    out += "  <rect x=\"" + num(b.x1) + "\" y=\"" + num(b.y1) + "\" width=\"" + num(b.width()) + "\" height=\"" +
           num(b.height()) + "\" fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>\n";
    if (options.show_text) {
      out += "  <text x=\"" + num(b.x1) + "\" y=\"" + num(b.y1 - 2) + "\" font-size=\"8\" fill=\"#555\">" +
             std::to_string(s.id) + ": " + escape(s.text) + "</text>\n";
    }
  }
  out += "</g>\n<g class=\"edges\">\n";
  for (const auto& e : graph.directed_edges) {
    const BBox& a = doc.segments[static_cast<std::size_t>(e.src)].bbox;
    const BBox& b = doc.segments[static_cast<std::size_t>(e.dst)].bbox;
    const int k = sector_index(e.e_dir);
    out += "  <line x1=\"" + num(a.center_x()) + "\" y1=\"" + num(a.center_y()) + "\" x2=\"" + num(b.center_x()) +
           "\" y2=\"" + num(b.center_y()) + "\" stroke=\"" + std::string(palette[static_cast<std::size_t>(k)]) +
           "\" stroke-width=\"1.2\" marker-end=\"url(#arrow" + std::to_string(k) + ")\"/>\n";
    if (options.edge_label != EdgeLabel::None) {
      const double value = options.edge_label == EdgeLabel::Distance ? e.d : e.e_dis;
      out += "  <text x=\"" + num(0.5 * (a.center_x() + b.center_x())) + "\" y=\"" +
             num(0.5 * (a.center_y() + b.center_y())) + "\" font-size=\"7\" fill=\"" +
             std::string(palette[static_cast<std::size_t>(k)]) + "\">" + num(value) + "</text>\n";
    }
  }
  out += "</g>\n<g class=\"legend\">\n";
  for (int k = 0; k < kSectorCount; ++k) {
    const double x = 10 + 60.0 * k;
    out += "  <rect x=\"" + num(x) + "\" y=\"" + num(h + 10) + "\" width=\"12\" height=\"12\" fill=\"" +
           std::string(palette[static_cast<std::size_t>(k)]) + "\"/>\n";
    out += "  <text x=\"" + num(x + 16) + "\" y=\"" + num(h + 20) + "\" font-size=\"10\">" + std::to_string(k) + " " +
           std::string(sector_name(static_cast<Sector>(k))) + "</text>\n";
  }
  out += "</g>\n</svg>\n";
  return out;
}

}  // namespace docgraph
