#include <cctype>
#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "docgraph/encoder.hpp"
#include "support.hpp"

using namespace docgraph;
using testing::error_code;

namespace {

// Second implementation of the hashing scheme: FNV-1a over lowercased bytes,
// offset basis xor splitmix64(seed); bucket and sign from two further
// splitmix64 draws. "total" under seed 42 was evaluated by hand from this
// definition (bucket 1, sign +1) before the embedder tests were written.
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::pair<int, double> reference_bucket(const std::string& token, std::uint64_t seed, int dim) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ mix(seed);
  for (char c : token) {
    h ^= static_cast<unsigned char>(std::tolower(static_cast<unsigned char>(c)));
    h *= 0x100000001b3ULL;
  }
  return {static_cast<int>(mix(h) % static_cast<std::uint64_t>(dim)), (mix(h ^ 0x5851f42d4c957f2dULL) >> 63) ? -1.0 : 1.0};
}

double norm(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

TEST_SUITE("encoder") {

TEST_CASE("embed_text basics") {
  const TextEmbedder e(64, 42);
  const std::vector<std::string> none;
  CHECK(embed_text(none, e) == std::vector<double>(64, 0.0));

  const std::vector<std::string> total = {"total"};
  const auto v = embed_text(total, e);
  REQUIRE(v.size() == 64);
  CHECK(v[1] == 1.0);
  int nonzero = 0;
  for (double x : v) nonzero += x != 0.0;
  CHECK(nonzero == 1);
  CHECK(e.bucket("total") == std::pair<int, double>{1, 1.0});

  const std::vector<std::string> tokens = {"Invoice", "No:", "A-1043", "total"};
  CHECK(embed_text(tokens, e) == embed_text(tokens, TextEmbedder(64, 42)));
}

TEST_CASE("hash buckets agree with the reference hashing") {
  const std::vector<std::string> words = {"total", "Date:", "ACME", "acme", "12/03/2019", "", "x", "Balance Due"};
  for (std::uint64_t seed : {0ULL, 42ULL, 7ULL}) {
    for (int dim : {8, 64, 100}) {
      const TextEmbedder e(dim, seed);
      for (const auto& w : words) CHECK(e.bucket(w) == reference_bucket(w, seed, dim));
    }
  }
}

TEST_CASE("embed_text is a normalised bag of words") {
  const TextEmbedder e(64, 3);
  const std::vector<std::string> a = {"net", "Total", "due", "net"};
  const std::vector<std::string> b = {"due", "net", "net", "TOTAL"};
  CHECK(embed_text(a, e) == embed_text(b, e));
  CHECK(norm(embed_text(a, e)) == doctest::Approx(1.0).epsilon(1e-12));

  // Two tokens whose signed buckets cancel give the zero vector.
  std::string w1, w2;
  for (int i = 0; i < 10000 && w2.empty(); ++i) {
    const std::string cand = "w" + std::to_string(i);
    if (w1.empty()) {
      w1 = cand;
    } else if (e.bucket(cand).first == e.bucket(w1).first && e.bucket(cand).second != e.bucket(w1).second) {
      w2 = cand;
    }
  }
  REQUIRE(!w2.empty());
  const std::vector<std::string> cancel = {w1, w2};
  const double n = norm(embed_text(cancel, e));
  CHECK(n == 0.0);
}

TEST_CASE("embed_size") {
  const std::vector<double> zero(16, 0.0);
  CHECK(embed_size({0, 0, 100, 50}, zero, 8) == std::vector<double>(8, 0.0));

  const std::vector<double> identity = {1, 0, 0, 1};
  const auto m = embed_size({0, 0, 100, 50}, identity, 2);
  CHECK(m[0] == doctest::Approx(0.1));
  CHECK(m[1] == doctest::Approx(0.05));
  const auto swapped = embed_size({0, 0, 50, 100}, identity, 2);
  CHECK(swapped[0] == m[1]);
  CHECK(swapped[1] == m[0]);

  CHECK(error_code([&] { embed_size({0, 0, 1, 1}, identity, 3); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("node_input") {
  const TextEmbedder text(64, 42);
  std::vector<double> proj(16);
  for (std::size_t i = 0; i < proj.size(); ++i) proj[i] = 0.1 * static_cast<double>(i) - 0.5;

  Segment seg;
  seg.text = "Total: 450";
  seg.bbox = {10, 10, 110, 30};
  seg.tokens = {{"Total:", {10, 10, 70, 30}}, {"450", {72, 10, 110, 30}}};
  const auto v = node_input(seg, text, proj, 8);
  CHECK(v.size() == 72);

  Segment empty = seg;
  empty.text.clear();
  empty.tokens.clear();
  const auto z = node_input(empty, text, proj, 8);
  for (int i = 0; i < 64; ++i) CHECK(z[i] == 0.0);
  for (int i = 64; i < 72; ++i) CHECK(z[i] == v[i]);

  Segment moved = seg;
  moved.bbox = {10, 10, 300, 60};
  const auto w = node_input(moved, text, proj, 8);
  CHECK(std::equal(w.begin(), w.begin() + 64, v.begin()));
  CHECK(!std::equal(w.begin() + 64, w.end(), v.begin() + 64));
}

TEST_CASE("external embeddings") {
  SUBCASE("parse two rows") {
    std::string raw = "docgraph-embeddings 1 16 2\n";
    for (int r = 0; r < 2; ++r) {
      raw += "doc" + std::string(" ") + segment_key(r);
      for (int i = 0; i < 16; ++i) raw += " " + std::to_string(0.5 * i + r);
      raw += "\n";
    }
    const ExternalEmbeddings e = parse_external(raw);
    CHECK(e.size() == 2);
    CHECK(e.dim() == 16);
    CHECK(e.lookup("doc", segment_key(1))[2] == 2.0);
    CHECK(error_code([&] { e.lookup("doc", segment_key(7)); }) == ErrorCode::MissingKey);
    const ExternalEmbeddings back = parse_external(e.serialize());
    CHECK(back.lookup("doc", segment_key(0)) == e.lookup("doc", segment_key(0)));
  }
  SUBCASE("short row") {
    std::string raw = "docgraph-embeddings 1 16 1\ndoc seg:0";
    for (int i = 0; i < 15; ++i) raw += " 1";
    raw += "\n";
    CHECK(error_code([&] { parse_external(raw); }) == ErrorCode::DimensionMismatch);
  }
  SUBCASE("bad header") {
    CHECK(error_code([] { parse_external("embeddings 16 2\n"); }) == ErrorCode::BadHeader);
    CHECK(error_code([] { parse_external(""); }) == ErrorCode::BadHeader);
    CHECK(error_code([] { parse_external("docgraph-embeddings 1 2 3\nd k 1 2\n"); }) == ErrorCode::BadHeader);
  }
  SUBCASE("file") {
    ExternalEmbeddings e(3);
    e.insert("d", token_key(0, 1), {1, 2, 3});
    const auto path = testing::scratch_dir("external") / "emb.txt";
    write_file(path, e.serialize());
    CHECK(load_external(path).lookup("d", "tok:0:1") == std::vector<double>{1, 2, 3});
    CHECK(error_code([&] { e.insert("d", "x", {1, 2}); }) == ErrorCode::DimensionMismatch);
  }
}

}  // TEST_SUITE
