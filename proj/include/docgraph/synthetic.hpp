#pragma once

#include <cstdint>
#include <vector>

#include "docgraph/doc_model.hpp"

namespace docgraph {

struct SyntheticSpec {
  std::uint64_t seed = 1;
  int n_docs = 100;
  int min_nodes = 20;
  int max_nodes = 40;
};

/// Form-like pages: rows of key ("question") / value ("answer") pairs with
/// the value directly East of its key, plus blocks of "other" segments whose
/// text is drawn from the same vocabulary as the values. Coordinates are on
/// the 0..1000 grid already.
std::vector<Document> generate_synthetic_corpus(const SyntheticSpec& spec);

}  // namespace docgraph
