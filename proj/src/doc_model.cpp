#include "docgraph/doc_model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "docgraph/error.hpp"
#include "json.hpp"

namespace docgraph {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

// Token boxes may poke out of their segment by this much before we warn.
constexpr double kContainmentSlack = 2.0;

std::string trim(std::string_view s) {
  auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

BBox box_from_json(const json& j, std::string_view where) {
  if (!j.is_array() || j.size() != 4) {
    throw Error(ErrorCode::MissingField, std::string(where) + ".box must be [x1,y1,x2,y2]");
  }
  for (const auto& v : j) {
    if (!v.is_number()) {
      throw Error(ErrorCode::MissingField, std::string(where) + ".box must be numeric");
    }
  }
  return BBox{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

// Integral coordinates serialize as integers so normalized documents diff cleanly.
ordered_json number(double v) {
  if (std::floor(v) == v && std::fabs(v) < 1e15) return static_cast<long long>(v);
  return v;
}

ordered_json box_to_json(const BBox& b) {
  return ordered_json::array({number(b.x1), number(b.y1), number(b.x2), number(b.y2)});
}

std::vector<Token> tokens_from_words(const json& words, std::string_view where) {
  std::vector<Token> tokens;
  if (!words.is_array()) {
    throw Error(ErrorCode::MissingField, std::string(where) + ".words must be an array");
  }
  for (const auto& w : words) {
    if (!w.is_object() || !w.contains("text") || !w["text"].is_string()) {
      throw Error(ErrorCode::MissingField, std::string(where) + ".words[].text");
    }
    if (!w.contains("box")) throw Error(ErrorCode::MissingField, std::string(where) + ".words[].box");
    std::string text = trim(w["text"].get<std::string>());
    if (text.empty()) continue;
    tokens.push_back(Token{std::move(text), box_from_json(w["box"], where)});
  }
  return tokens;
}

// Without word boxes, split the segment text on whitespace and share the
// segment width out proportionally to character count.
std::vector<Token> tokens_from_text(const std::string& text, const BBox& box) {
  std::vector<std::string> words;
  std::istringstream in(text);
  for (std::string w; in >> w;) words.push_back(w);
  std::size_t chars = 0;
  for (const auto& w : words) chars += w.size();
  std::vector<Token> tokens;
  double x = box.x1;
  for (const auto& w : words) {
    double span = chars == 0 ? 0.0 : box.width() * static_cast<double>(w.size()) / static_cast<double>(chars);
    tokens.push_back(Token{w, BBox{x, box.y1, x + span, box.y2}});
    x += span;
  }
  if (!tokens.empty()) tokens.back().bbox.x2 = box.x2;
  return tokens;
}

std::string join_tokens(const std::vector<Token>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t.text;
  }
  return out;
}

Segment segment_from_json(const json& j, std::string_view where) {
  if (!j.is_object()) throw Error(ErrorCode::MissingField, std::string(where) + " is not an object");
  if (!j.contains("box")) throw Error(ErrorCode::MissingField, "box");
  Segment seg;
  seg.bbox = box_from_json(j["box"], where);
  if (j.contains("words")) seg.tokens = tokens_from_words(j["words"], where);
  if (j.contains("text") && j["text"].is_string()) seg.text = trim(j["text"].get<std::string>());
  if (seg.text.empty()) seg.text = join_tokens(seg.tokens);
  if (seg.tokens.empty() && !seg.text.empty()) seg.tokens = tokens_from_text(seg.text, seg.bbox);
  if (j.contains("label") && j["label"].is_string()) {
    std::string label = lowercase(trim(j["label"].get<std::string>()));
    if (!label.empty()) seg.label = std::move(label);
  }
  return seg;
}

void finalize(Document& doc) {
  for (std::size_t i = 0; i < doc.segments.size(); ++i) doc.segments[i].id = static_cast<int>(i);
  std::set<std::string> labels(doc.label_set.begin(), doc.label_set.end());
  for (const auto& s : doc.segments) {
    if (s.label) labels.insert(*s.label);
  }
  doc.label_set.assign(labels.begin(), labels.end());
}

PageSize extent_of(const Document& doc) {
  PageSize p{0, 0};
  for (const auto& s : doc.segments) {
    p.width = std::max(p.width, s.bbox.x2);
    p.height = std::max(p.height, s.bbox.y2);
    for (const auto& t : s.tokens) {
      p.width = std::max(p.width, t.bbox.x2);
      p.height = std::max(p.height, t.bbox.y2);
    }
  }
  p.width = std::max(1.0, std::ceil(p.width));
  p.height = std::max(1.0, std::ceil(p.height));
  return p;
}

ordered_json segment_to_json(const Segment& s) {
  ordered_json j;
  j["id"] = s.id;
  j["text"] = s.text;
  j["box"] = box_to_json(s.bbox);
  if (s.label) j["label"] = *s.label;
  ordered_json words = ordered_json::array();
  for (const auto& t : s.tokens) {
    ordered_json w;
    w["text"] = t.text;
    w["box"] = box_to_json(t.bbox);
    words.push_back(std::move(w));
  }
  j["words"] = std::move(words);
  return j;
}

bool is_meta_line(const json& j) {
  return j.is_object() && !j.contains("box") && (j.contains("page_size") || j.contains("doc_id"));
}

PageSize page_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw Error(ErrorCode::MissingField, "page_size must be [width, height]");
  }
  return PageSize{j[0].get<double>(), j[1].get<double>()};
}

double scale_coord(double c, double page_dim) { return std::round(c * 1000.0 / page_dim); }

BBox scale_box(const BBox& b, const PageSize& p) {
  return BBox{scale_coord(b.x1, p.width), scale_coord(b.y1, p.height), scale_coord(b.x2, p.width),
              scale_coord(b.y2, p.height)};
}

}  // namespace

Document parse_funsd(std::string_view raw, std::string doc_id, std::optional<PageSize> page_size) {
  json root;
  try {
    root = json::parse(raw);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::MalformedJson, e.what());
  }
  if (!root.is_object() || !root.contains("form")) throw Error(ErrorCode::MissingField, "form");
  const json& form = root["form"];
  if (!form.is_array()) throw Error(ErrorCode::MissingField, "form must be an array");
  if (form.empty()) throw Error(ErrorCode::EmptyDocument, doc_id + " has no form entries");

  Document doc;
  doc.doc_id = std::move(doc_id);
  for (std::size_t i = 0; i < form.size(); ++i) {
    const json& entry = form[i];
    if (!entry.is_object()) throw Error(ErrorCode::MissingField, "form[" + std::to_string(i) + "]");
    for (const char* field : {"box", "label"}) {
      if (!entry.contains(field)) throw Error(ErrorCode::MissingField, field);
    }
    if (!entry.contains("text") && !entry.contains("words")) throw Error(ErrorCode::MissingField, "text");
    doc.segments.push_back(segment_from_json(entry, "form[" + std::to_string(i) + "]"));
  }
  doc.page_size = page_size ? *page_size : extent_of(doc);
  finalize(doc);
  return doc;
}

Document parse_generic(std::string_view raw, std::string doc_id) {
  Document doc;
  doc.doc_id = std::move(doc_id);
  std::unordered_set<long long> seen;
  bool saw_meta = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= raw.size()) {
    std::size_t end = raw.find('\n', pos);
    if (end == std::string_view::npos) end = raw.size();
    std::string line = trim(raw.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;

    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error&) {
      throw Error(ErrorCode::MalformedLine, "line " + std::to_string(line_no) + ": invalid JSON");
    }
    if (!saw_meta && doc.segments.empty() && is_meta_line(j)) {
      saw_meta = true;
      try {
        if (j.contains("doc_id")) doc.doc_id = j["doc_id"].get<std::string>();
        if (j.contains("page_size")) doc.page_size = page_from_json(j["page_size"]);
        if (j.contains("label_set")) doc.label_set = j["label_set"].get<std::vector<std::string>>();
      } catch (const json::exception&) {
        throw Error(ErrorCode::MalformedLine, "line " + std::to_string(line_no) + ": bad metadata");
      }
      continue;
    }
    if (!j.is_object() || !j.contains("id") || !j["id"].is_number_integer() || !j.contains("box")) {
      throw Error(ErrorCode::MalformedLine, "line " + std::to_string(line_no) + ": needs integer id and box");
    }
    long long id = j["id"].get<long long>();
    if (!seen.insert(id).second) throw Error(ErrorCode::DuplicateId, std::to_string(id));
    try {
      doc.segments.push_back(segment_from_json(j, "line " + std::to_string(line_no)));
    } catch (const Error& e) {
      throw Error(ErrorCode::MalformedLine, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (doc.segments.empty()) throw Error(ErrorCode::EmptyDocument, doc.doc_id + " has no segments");
  finalize(doc);
  return doc;
}

std::string serialize_generic(const Document& doc) {
  ordered_json meta;
  meta["doc_id"] = doc.doc_id;
  meta["page_size"] = ordered_json::array({number(doc.page_size.width), number(doc.page_size.height)});
  meta["label_set"] = doc.label_set;
  std::string out = meta.dump() + "\n";
  for (const auto& s : doc.segments) out += segment_to_json(s).dump() + "\n";
  return out;
}

std::string document_to_json(const Document& doc) {
  ordered_json j;
  j["doc_id"] = doc.doc_id;
  j["page_size"] = ordered_json::array({number(doc.page_size.width), number(doc.page_size.height)});
  j["label_set"] = doc.label_set;
  ordered_json segs = ordered_json::array();
  for (const auto& s : doc.segments) segs.push_back(segment_to_json(s));
  j["segments"] = std::move(segs);
  return j.dump(1) + "\n";
}

Document document_from_json(std::string_view raw) {
  json j;
  try {
    j = json::parse(raw);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::MalformedJson, e.what());
  }
  for (const char* field : {"doc_id", "page_size", "segments"}) {
    if (!j.contains(field)) throw Error(ErrorCode::MissingField, field);
  }
  Document doc;
  doc.doc_id = j["doc_id"].get<std::string>();
  doc.page_size = page_from_json(j["page_size"]);
  if (j.contains("label_set")) doc.label_set = j["label_set"].get<std::vector<std::string>>();
  const json& segs = j["segments"];
  if (!segs.is_array() || segs.empty()) throw Error(ErrorCode::EmptyDocument, doc.doc_id);
  for (std::size_t i = 0; i < segs.size(); ++i) {
    doc.segments.push_back(segment_from_json(segs[i], "segments[" + std::to_string(i) + "]"));
  }
  finalize(doc);
  return doc;
}

Document normalize_coords(const Document& doc) {
  const PageSize& p = doc.page_size;
  if (!(p.width > 0) || !(p.height > 0)) {
    throw Error(ErrorCode::ZeroPageDimension, doc.doc_id + " page_size must be positive");
  }
  Document out = doc;
  for (auto& s : out.segments) {
    s.bbox = scale_box(s.bbox, p);
    for (auto& t : s.tokens) t.bbox = scale_box(t.bbox, p);
  }
  out.page_size = PageSize{1000, 1000};
  return out;
}

ValidationReport validate_document(const Document& doc) {
  ValidationReport report;
  auto where = [](const Segment& s) { return "segment " + std::to_string(s.id); };
  auto in_range = [&](const BBox& b) {
    return b.x1 >= 0 && b.y1 >= 0 && b.x2 <= doc.page_size.width && b.y2 <= doc.page_size.height &&
           b.x1 <= doc.page_size.width && b.y1 <= doc.page_size.height && b.x2 >= 0 && b.y2 >= 0;
  };

  if (doc.segments.empty()) report.errors.push_back({"EmptyDocument", doc.doc_id + " has no segments"});
  std::set<std::string> labels(doc.label_set.begin(), doc.label_set.end());
  for (const auto& s : doc.segments) {
    const BBox& b = s.bbox;
    if (b.x1 > b.x2 || b.y1 > b.y2) {
      report.errors.push_back({"InvertedBox", where(s)});
    } else if (b.width() == 0 || b.height() == 0) {
      report.warnings.push_back({"ZeroAreaBox", where(s)});
    }
    if (!in_range(b)) report.errors.push_back({"OutOfRange", where(s)});
    if (trim(s.text).empty()) report.errors.push_back({"EmptyText", where(s)});
    if (s.label && !labels.count(*s.label)) {
      report.errors.push_back({"UnknownLabel", where(s) + " label " + *s.label});
    }
    for (std::size_t k = 0; k < s.tokens.size(); ++k) {
      const BBox& t = s.tokens[k].bbox;
      if (t.x1 > t.x2 || t.y1 > t.y2) {
        report.errors.push_back({"InvertedBox", where(s) + " token " + std::to_string(k)});
        continue;
      }
      if (t.x1 < b.x1 - kContainmentSlack || t.y1 < b.y1 - kContainmentSlack ||
          t.x2 > b.x2 + kContainmentSlack || t.y2 > b.y2 + kContainmentSlack) {
        report.warnings.push_back({"TokenOutsideSegment", where(s) + " token " + std::to_string(k)});
      }
    }
  }
  return report;
}

std::vector<Document> load_funsd_split(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::path root = dir;
  if (fs::is_directory(dir / "annotations")) root = dir / "annotations";
  if (!fs::is_directory(root)) throw Error(ErrorCode::Io, "not a directory: " + root.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Document> docs;
  docs.reserve(files.size());
  for (const auto& f : files) docs.push_back(parse_funsd(read_file(f), f.stem().string()));
  return docs;
}

std::vector<std::string> collect_labels(const std::vector<Document>& docs) {
  std::set<std::string> labels;
  for (const auto& d : docs) {
    for (const auto& s : d.segments) {
      if (s.label) labels.insert(*s.label);
    }
  }
  return {labels.begin(), labels.end()};
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

}  // namespace docgraph
