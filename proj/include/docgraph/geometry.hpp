#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

#include "docgraph/doc_model.hpp"

namespace docgraph {

/// Eight 45-degree sectors around a source box, counter-clockwise from East
/// on the page (North is up, i.e. towards smaller y).
enum class Sector : std::uint8_t { E = 0, NE, N, NW, W, SW, S, SE };

constexpr int kSectorCount = 8;

constexpr int sector_index(Sector s) { return static_cast<int>(s); }
Sector sector_from_index(int index);
std::string_view sector_name(Sector s);

/// Shortest Euclidean distance between two boxes; 0 when they touch or overlap.
double rect_distance(const BBox& a, const BBox& b);

/// Sector of `target` as seen from `source`, measured centre to centre.
/// Sector k covers angles [45k - 22.5, 45k + 22.5) degrees.
/// Throws CoincidentCenters when the two centres are equal.
Sector direction_sector(const BBox& source, const BBox& target);

bool centers_coincide(const BBox& a, const BBox& b);

struct Neighbor {
  int target_id = -1;
  double distance = 0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

// Nearest node per sector; empty sectors stay nullopt.
struct DlosResult {
  std::array<std::optional<Neighbor>, kSectorCount> sectors;

  const std::optional<Neighbor>& operator[](Sector s) const { return sectors[sector_index(s)]; }
  int count() const;

  friend bool operator==(const DlosResult&, const DlosResult&) = default;
};

/// Direction line-of-sight neighbours of one node: for each sector, the node
/// with the smallest box distance (ties to the smaller id). Pairs with
/// coincident centres are skipped.
DlosResult dlos_neighbors(int source_id, const Document& doc);

/// Per-sector exhaustive scan with the same contract as dlos_neighbors.
/// Kept separate so the two can be checked against each other.
DlosResult dlos_brute_force(int source_id, const Document& doc);

}  // namespace docgraph
