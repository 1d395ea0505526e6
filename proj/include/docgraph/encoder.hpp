#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "docgraph/doc_model.hpp"

namespace docgraph {

/// Signed feature hashing over lower-cased tokens, mean-pooled and
/// L2-normalised. Stand-in for language-model token embeddings.
class TextEmbedder {
 public:
  explicit TextEmbedder(int dim = 64, std::uint64_t seed = 42);

  int dim() const { return dim_; }
  std::uint64_t seed() const { return seed_; }

  std::vector<double> embed(std::span<const std::string> tokens) const;

  /// Hash bucket and sign (+1/-1) of one token.
  std::pair<int, double> bucket(std::string_view token) const;

 private:
  int dim_;
  std::uint64_t seed_;
};

/// Segment text embedding over its word tokens.
std::vector<double> embed_text(std::span<const std::string> tokens, const TextEmbedder& embedder);

/// Word-level vector for token `index` of a segment: the word itself plus a
/// marker for its left neighbour (or segment start), hashed together.
std::vector<double> embed_token_in_context(const Segment& seg, std::size_t index,
                                           const TextEmbedder& embedder);

/// [width/1000, height/1000] times a 2 x D_m projection (row-major).
std::vector<double> embed_size(const BBox& bbox, std::span<const double> projection, int size_dim);

/// Node input E_u = emb(T_u) followed by the size embedding.
std::vector<double> node_input(const Segment& seg, const TextEmbedder& text,
                               std::span<const double> projection, int size_dim);

std::vector<std::string> segment_words(const Segment& seg);

/// Externally computed vectors keyed by (doc_id, key). Keys are free-form;
/// segment_key / token_key give the conventional spellings.
///
/// File format (text):
///   docgraph-embeddings 1 <dim> <count>
///   <doc_id> <key> <v_1> ... <v_dim>      (count rows)
/// Lines starting with '#' are ignored.
class ExternalEmbeddings {
 public:
  explicit ExternalEmbeddings(int dim = 0) : dim_(dim) {}

  int dim() const { return dim_; }
  std::size_t size() const { return vectors_.size(); }

  void insert(const std::string& doc_id, const std::string& key, std::vector<double> v);
  const std::vector<double>& lookup(const std::string& doc_id, const std::string& key) const;
  bool contains(const std::string& doc_id, const std::string& key) const;

  std::string serialize() const;

 private:
  int dim_;
  std::map<std::pair<std::string, std::string>, std::vector<double>> vectors_;
};

std::string segment_key(int segment_id);
std::string token_key(int segment_id, int token_index);

ExternalEmbeddings parse_external(std::string_view raw);
ExternalEmbeddings load_external(const std::filesystem::path& path);

}  // namespace docgraph
