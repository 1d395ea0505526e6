#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace docgraph {

// Axis-aligned box, top-left (x1, y1) to bottom-right (x2, y2); y grows down.
struct BBox {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double center_x() const { return 0.5 * (x1 + x2); }
  double center_y() const { return 0.5 * (y1 + y2); }

  friend bool operator==(const BBox&, const BBox&) = default;
};

struct Token {
  std::string text;
  BBox bbox;

  friend bool operator==(const Token&, const Token&) = default;
};

struct Segment {
  int id = 0;
  std::string text;
  BBox bbox;
  std::vector<Token> tokens;
  std::optional<std::string> label;

  friend bool operator==(const Segment&, const Segment&) = default;
};

struct PageSize {
  double width = 1000;
  double height = 1000;

  friend bool operator==(const PageSize&, const PageSize&) = default;
};

struct Document {
  std::string doc_id;
  std::vector<Segment> segments;
  PageSize page_size;
  std::vector<std::string> label_set;

  std::size_t size() const { return segments.size(); }

  friend bool operator==(const Document&, const Document&) = default;
};

struct Finding {
  std::string code;
  std::string message;
};

struct ValidationReport {
  std::vector<Finding> errors;
  std::vector<Finding> warnings;

  bool ok() const { return errors.empty(); }
};

/// Parses a FUNSD annotation file (top-level "form" array). When
/// `page_size` is absent the page extent is taken as the furthest box corner.
Document parse_funsd(std::string_view raw, std::string doc_id = "doc",
                     std::optional<PageSize> page_size = std::nullopt);

/// Parses the generic JSON-lines segment format. An optional first line of
/// the form {"doc_id": ..., "page_size": [w, h], "label_set": [...]} carries
/// document metadata; every other line is one segment.
Document parse_generic(std::string_view raw, std::string doc_id = "doc");

/// Inverse of parse_generic: metadata line followed by one segment per line.
std::string serialize_generic(const Document& doc);

/// Canonical document JSON (doc_id, page_size, label_set, segments) with a
/// stable field order.
std::string document_to_json(const Document& doc);
Document document_from_json(std::string_view raw);

/// Scales every box onto the 0..1000 grid; the result has page_size 1000x1000.
Document normalize_coords(const Document& doc);

ValidationReport validate_document(const Document& doc);

/// Loads every *.json annotation in `dir` (or `dir/annotations`), sorted by
/// file name.
std::vector<Document> load_funsd_split(const std::filesystem::path& dir);

/// Sorted distinct labels across documents.
std::vector<std::string> collect_labels(const std::vector<Document>& docs);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace docgraph
