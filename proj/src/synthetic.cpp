#include "docgraph/synthetic.hpp"

#include <algorithm>
#include <array>
#include <optional>
#include <random>
#include <string>
#include <string_view>

#include "docgraph/error.hpp"
#include "docgraph/geometry.hpp"

namespace docgraph {

namespace {

enum Category { kDate, kName, kAmount, kIdent, kPhone, kPlace, kCategoryCount };

struct KeyPhrase {
  std::string_view text;
  Category category;
};

// Listed in the order the fields appear on the form; neighbouring fields
// belong to different value categories.
constexpr std::array<KeyPhrase, 14> kKeys = {{
    {"Invoice No:", kIdent},    {"Date:", kDate},           {"Company:", kName},
    {"Address:", kPlace},       {"Phone:", kPhone},         {"Total:", kAmount},
    {"Contact Person:", kName}, {"Fax:", kPhone},           {"Ref:", kIdent},
    {"Due Date:", kDate},       {"Amount Paid:", kAmount},  {"Account Number:", kIdent},
    {"Name:", kName},           {"Balance Due:", kAmount},
}};

const std::array<std::vector<std::string_view>, kCategoryCount> kValueWords = {{
    {"12/03/2019", "Jan", "March", "2021", "04/11", "Monday", "1998", "Q3"},
    {"Smith", "Acme", "Corp", "John", "Lee", "Tobacco", "Institute", "Brown"},
    {"$1,200.00", "450", "USD", "12.5%", "$98.10", "3,400", "net", "0.00"},
    {"A-1043", "7781", "INV-22", "No.", "55-0193", "X12", "B7", "#204"},
    {"(212)", "555-0134", "ext.", "312", "800-555", "0198", "tel", "+1"},
    {"Street", "Ave", "Suite", "100", "New", "York", "NY", "Richmond"},
}};

// Sequence drawn from one stream so output is identical across standard
// library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed ^ 0x243f6a8885a308d3ULL) {}
  int uniform(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(engine_() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  template <typename C>
  const auto& pick(const C& c) {
    return c[static_cast<std::size_t>(uniform(0, static_cast<int>(c.size()) - 1))];
  }

 private:
  std::mt19937_64 engine_;
};

std::string value_text(Rng& rng, Category cat, int min_words, int max_words) {
  const int n = rng.uniform(min_words, max_words);
  std::string out;
  for (int i = 0; i < n; ++i) {
    if (i) out += ' ';
    out += rng.pick(kValueWords[static_cast<std::size_t>(cat)]);
  }
  return out;
}

// Glyph width is half the line height; words share the box by character count.
Segment make_segment(const std::string& text, double x, double y, double h, double max_x2,
                     const std::string& label) {
  std::vector<std::string> words;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find(' ', start);
    if (end == std::string::npos) end = text.size();
    words.emplace_back(text.substr(start, end - start));
    start = end + 1;
  }
  const double char_w = 0.5 * h;
  double width = char_w * static_cast<double>(text.size());
  double x2 = std::min(x + width, max_x2);
  width = x2 - x;

  Segment seg;
  seg.text = text;
  seg.bbox = BBox{x, y, x2, y + h};
  seg.label = label;
  std::size_t chars = 0;
  for (const auto& w : words) chars += w.size();
  double cx = x;
  for (const auto& w : words) {
    const double span = width * static_cast<double>(w.size()) / static_cast<double>(chars);
    seg.tokens.push_back(Token{w, BBox{cx, y, cx + span, y + h}});
    cx += span;
  }
  seg.tokens.back().bbox.x2 = x2;
  return seg;
}

// Rows of "other" segments. Returns the y just below the block.
double place_distractors(Rng& rng, int count, double y, std::vector<Segment>& out) {
  double x = 40 + rng.uniform(0, 40);
  double row_h = rng.uniform(10, 20);
  for (int i = 0; i < count; ++i) {
    const auto cat = static_cast<Category>(rng.uniform(0, kCategoryCount - 1));
    const std::string text = value_text(rng, cat, 1, 3);
    const double width = 0.5 * row_h * static_cast<double>(text.size());
    if (x + width > 960 && x > 100) {
      y += row_h + rng.uniform(40, 52);
      x = 40 + rng.uniform(0, 40);
      row_h = rng.uniform(10, 20);
    }
    out.push_back(make_segment(text, x, y, row_h, 960, "other"));
    x = out.back().bbox.x2 + rng.uniform(40, 80);
  }
  return count > 0 ? y + row_h + rng.uniform(40, 52) : y;
}

bool values_are_east_neighbours(const Document& doc, const std::vector<std::pair<int, int>>& pairs) {
  for (auto [key, value] : pairs) {
    const auto east = dlos_neighbors(key, doc)[Sector::E];
    if (!east || east->target_id != value) return false;
  }
  return true;
}

std::optional<Document> try_layout(Rng& rng, const SyntheticSpec& spec, int index) {
  const int n = rng.uniform(spec.min_nodes, spec.max_nodes);
  int distractors = std::max(1, n / 6);
  const int pair_count = std::max(1, (n - distractors) / 2);
  distractors = std::max(0, n - 2 * pair_count);
  constexpr double kLeft = 40;
  constexpr double kRight = 960;

  Document doc;
  doc.doc_id = "synth-" + std::to_string(spec.seed) + "-" + std::to_string(index);
  doc.page_size = PageSize{1000, 1000};
  doc.label_set = {"answer", "other", "question"};

  const int top = distractors / 2;
  double y = place_distractors(rng, top, 30 + rng.uniform(0, 10), doc.segments);

  // Fields follow one canonical form order, as on a printed template: each
  // form shows a contiguous run of it, wrapping around at the end.
  std::vector<int> key_order;
  const int first = rng.uniform(0, static_cast<int>(kKeys.size()) - 1);
  for (int i = 0; i < pair_count; ++i) key_order.push_back((first + i) % static_cast<int>(kKeys.size()));

  // Long forms wrap into two columns, filled row by row.
  const int columns = pair_count > 18 ? 2 : 1;
  const double column_width = (kRight - kLeft) / columns;
  std::vector<std::pair<int, int>> pairs;
  for (std::size_t i = 0; i < key_order.size();) {
    const double h = rng.uniform(12, 20);
    for (int c = 0; c < columns && i < key_order.size(); ++c, ++i) {
      const auto& key = kKeys[static_cast<std::size_t>(key_order[i])];
      const double col_x = kLeft + c * column_width;
      const double col_end = col_x + column_width - 40;
      doc.segments.push_back(make_segment(std::string(key.text), col_x + rng.uniform(0, 20), y, h, col_end, "question"));
      const int key_id = static_cast<int>(doc.segments.size()) - 1;
      const double vx = doc.segments.back().bbox.x2 + rng.uniform(6, 18);
      doc.segments.push_back(make_segment(value_text(rng, key.category, 1, 3), vx, y, h, col_end, "answer"));
      pairs.emplace_back(key_id, key_id + 1);
    }
    y += h + rng.uniform(24, 34);
  }

  y = place_distractors(rng, distractors - top, y, doc.segments);
  for (std::size_t i = 0; i < doc.segments.size(); ++i) doc.segments[i].id = static_cast<int>(i);

  if (y > 1000 || !values_are_east_neighbours(doc, pairs)) return std::nullopt;
  return doc;
}

Document generate_one(Rng& rng, const SyntheticSpec& spec, int index) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    if (auto doc = try_layout(rng, spec, index)) return *std::move(doc);
  }
  throw Error(ErrorCode::InvalidConfig, "synth document " + std::to_string(index) + ": no valid layout in 100 attempts");
}

}  // namespace

std::vector<Document> generate_synthetic_corpus(const SyntheticSpec& spec) {
  if (spec.n_docs < 0 || spec.min_nodes < 3 || spec.max_nodes < spec.min_nodes || spec.max_nodes > 60) {
    throw Error(ErrorCode::InvalidConfig, "synthetic corpus needs 0 <= docs and 3 <= min_nodes <= max_nodes <= 60");
  }
  Rng rng(spec.seed);
  std::vector<Document> docs;
  docs.reserve(static_cast<std::size_t>(spec.n_docs));
  for (int i = 0; i < spec.n_docs; ++i) docs.push_back(generate_one(rng, spec, i));
  return docs;
}

}  // namespace docgraph
