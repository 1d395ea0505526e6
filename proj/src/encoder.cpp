#include "docgraph/encoder.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "docgraph/error.hpp"

namespace docgraph {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s, std::uint64_t seed) {
  std::uint64_t h = 14695981039346656037ULL ^ splitmix64(seed);
  for (unsigned char c : s) {
    h ^= static_cast<std::uint64_t>(std::tolower(c));
    h *= 1099511628211ULL;
  }
  return h;
}

void l2_normalize(std::vector<double>& v) {
  double norm = 0;
  for (double x : v) norm += x * x;
  if (norm == 0) return;
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
}

}  // namespace

TextEmbedder::TextEmbedder(int dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
  if (dim <= 0) throw Error(ErrorCode::InvalidConfig, "text embedding dim must be positive");
}

std::pair<int, double> TextEmbedder::bucket(std::string_view token) const {
  const std::uint64_t h = fnv1a(token, seed_);
  const int index = static_cast<int>(splitmix64(h) % static_cast<std::uint64_t>(dim_));
  const double sign = (splitmix64(h ^ 0x5851f42d4c957f2dULL) >> 63) ? -1.0 : 1.0;
  return {index, sign};
}

std::vector<double> TextEmbedder::embed(std::span<const std::string> tokens) const {
  std::vector<double> v(static_cast<std::size_t>(dim_), 0.0);
  if (tokens.empty()) return v;
  for (const auto& t : tokens) {
    auto [index, sign] = bucket(t);
    v[static_cast<std::size_t>(index)] += sign;
  }
  for (double& x : v) x /= static_cast<double>(tokens.size());
  l2_normalize(v);
  return v;
}

std::vector<double> embed_text(std::span<const std::string> tokens, const TextEmbedder& embedder) {
  return embedder.embed(tokens);
}

std::vector<std::string> segment_words(const Segment& seg) {
  std::vector<std::string> words;
  if (!seg.tokens.empty()) {
    for (const auto& t : seg.tokens) words.push_back(t.text);
    return words;
  }
  std::istringstream in(seg.text);
  for (std::string w; in >> w;) words.push_back(w);
  return words;
}

std::vector<double> embed_token_in_context(const Segment& seg, std::size_t index,
                                           const TextEmbedder& embedder) {
  const std::string prev = index == 0 ? std::string("<s>") : seg.tokens.at(index - 1).text;
  const std::vector<std::string> features = {seg.tokens.at(index).text, "<prev>" + prev};
  return embedder.embed(features);
}

std::vector<double> embed_size(const BBox& bbox, std::span<const double> projection, int size_dim) {
  if (projection.size() != static_cast<std::size_t>(2 * size_dim)) {
    throw Error(ErrorCode::DimensionMismatch, "size projection must be 2 x size_dim");
  }
  const double w = bbox.width() / 1000.0;
  const double h = bbox.height() / 1000.0;
  std::vector<double> out(static_cast<std::size_t>(size_dim));
  for (int j = 0; j < size_dim; ++j) {
    out[static_cast<std::size_t>(j)] = w * projection[static_cast<std::size_t>(j)] +
                                       h * projection[static_cast<std::size_t>(size_dim + j)];
  }
  return out;
}

std::vector<double> node_input(const Segment& seg, const TextEmbedder& text,
                               std::span<const double> projection, int size_dim) {
  const auto words = segment_words(seg);
  std::vector<double> out = text.embed(words);
  const auto size = embed_size(seg.bbox, projection, size_dim);
  out.insert(out.end(), size.begin(), size.end());
  return out;
}

std::string segment_key(int segment_id) { return "seg:" + std::to_string(segment_id); }

std::string token_key(int segment_id, int token_index) {
  return "tok:" + std::to_string(segment_id) + ":" + std::to_string(token_index);
}

void ExternalEmbeddings::insert(const std::string& doc_id, const std::string& key, std::vector<double> v) {
  if (dim_ == 0) dim_ = static_cast<int>(v.size());
  if (static_cast<int>(v.size()) != dim_) {
    throw Error(ErrorCode::DimensionMismatch, doc_id + "/" + key + " has " + std::to_string(v.size()) +
                                                  " values, expected " + std::to_string(dim_));
  }
  vectors_[{doc_id, key}] = std::move(v);
}

const std::vector<double>& ExternalEmbeddings::lookup(const std::string& doc_id, const std::string& key) const {
  auto it = vectors_.find({doc_id, key});
  if (it == vectors_.end()) throw Error(ErrorCode::MissingKey, doc_id + "/" + key);
  return it->second;
}

bool ExternalEmbeddings::contains(const std::string& doc_id, const std::string& key) const {
  return vectors_.count({doc_id, key}) > 0;
}

std::string ExternalEmbeddings::serialize() const {
  std::string out = "docgraph-embeddings 1 " + std::to_string(dim_) + " " + std::to_string(vectors_.size()) + "\n";
  char buf[64];
  for (const auto& [k, v] : vectors_) {
    out += k.first + " " + k.second;
    for (double x : v) {
      std::snprintf(buf, sizeof buf, " %.17g", x);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

ExternalEmbeddings parse_external(std::string_view raw) {
  std::istringstream in{std::string(raw)};
  std::string line;
  auto next_line = [&]() {
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      return true;
    }
    return false;
  };

  if (!next_line()) throw Error(ErrorCode::BadHeader, "empty embeddings file");
  std::istringstream header(line);
  std::string magic;
  int version = 0;
  long long dim = 0, count = -1;
  if (!(header >> magic >> version >> dim >> count) || magic != "docgraph-embeddings" || version != 1 ||
      dim <= 0 || count < 0) {
    throw Error(ErrorCode::BadHeader, "expected 'docgraph-embeddings 1 <dim> <count>', got '" + line + "'");
  }

  ExternalEmbeddings emb(static_cast<int>(dim));
  long long row = 0;
  while (next_line()) {
    ++row;
    std::istringstream fields(line);
    std::string doc_id, key;
    if (!(fields >> doc_id >> key)) throw Error(ErrorCode::DimensionMismatch, "row " + std::to_string(row));
    std::vector<double> v;
    for (double x; fields >> x;) v.push_back(x);
    if (!fields.eof()) throw Error(ErrorCode::DimensionMismatch, "row " + std::to_string(row) + ": non-numeric value");
    if (static_cast<long long>(v.size()) != dim) {
      throw Error(ErrorCode::DimensionMismatch, "row " + std::to_string(row) + " has " +
                                                    std::to_string(v.size()) + " values, expected " +
                                                    std::to_string(dim));
    }
    emb.insert(doc_id, key, std::move(v));
  }
  if (row != count) {
    throw Error(ErrorCode::BadHeader, "header declares " + std::to_string(count) + " rows, found " +
                                          std::to_string(row));
  }
  return emb;
}

ExternalEmbeddings load_external(const std::filesystem::path& path) { return parse_external(read_file(path)); }

}  // namespace docgraph
