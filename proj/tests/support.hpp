#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "docgraph/doc_model.hpp"
#include "docgraph/error.hpp"

namespace testing {

using docgraph::BBox;
using docgraph::Document;
using docgraph::Segment;

inline Document make_doc(const std::vector<BBox>& boxes, const std::string& doc_id = "t") {
  Document doc;
  doc.doc_id = doc_id;
  doc.page_size = {1000, 1000};
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    Segment s;
    s.id = static_cast<int>(i);
    s.text = "w" + std::to_string(i);
    s.bbox = boxes[i];
    s.tokens.push_back({s.text, s.bbox});
    doc.segments.push_back(s);
  }
  return doc;
}

// A=(0,0,10,10), B=(40,0,50,10), C=(80,0,90,10)
inline Document row_document() {
  return make_doc({{0, 0, 10, 10}, {40, 0, 50, 10}, {80, 0, 90, 10}}, "row");
}

// Integer-cornered boxes scattered over the page; sizes vary from thin
// words to blocks so every sector gets exercised.
inline Document random_document(std::uint64_t seed, int n) {
  std::mt19937_64 rng(seed);
  auto uni = [&](int lo, int hi) { return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1)); };
  std::vector<BBox> boxes;
  for (int i = 0; i < n; ++i) {
    const double x = uni(0, 900), y = uni(0, 950);
    boxes.push_back({x, y, x + uni(1, 100), y + uni(1, 50)});
  }
  return make_doc(boxes, "rand" + std::to_string(seed));
}

// Code of the docgraph::Error thrown by f, or nullopt when nothing is thrown.
template <typename F>
std::optional<docgraph::ErrorCode> error_code(F&& f) {
  try {
    f();
  } catch (const docgraph::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  std::filesystem::path base = std::filesystem::temp_directory_path() / "docgraph_tests";
  if (const char* env = std::getenv("DOCGRAPH_TEST_TMP")) base = env;
  const auto dir = base / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing
