#include "docgraph/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "docgraph/error.hpp"

namespace docgraph {

Sector sector_from_index(int index) {
  if (index < 0 || index >= kSectorCount) {
    throw Error(ErrorCode::InvalidConfig, "sector index out of range: " + std::to_string(index));
  }
  return static_cast<Sector>(index);
}

std::string_view sector_name(Sector s) {
  static constexpr std::array<std::string_view, kSectorCount> names = {"E", "NE", "N", "NW",
                                                                       "W", "SW", "S", "SE"};
  return names[sector_index(s)];
}

double rect_distance(const BBox& a, const BBox& b) {
  const double gx = std::max({0.0, a.x1 - b.x2, b.x1 - a.x2});
  const double gy = std::max({0.0, a.y1 - b.y2, b.y1 - a.y2});
  return std::sqrt(gx * gx + gy * gy);
}

bool centers_coincide(const BBox& a, const BBox& b) {
  return a.center_x() == b.center_x() && a.center_y() == b.center_y();
}

Sector direction_sector(const BBox& source, const BBox& target) {
  if (centers_coincide(source, target)) {
    throw Error(ErrorCode::CoincidentCenters, "direction undefined for boxes sharing a centre");
  }
  const double dx = target.center_x() - source.center_x();
  const double dy = -(target.center_y() - source.center_y());
  const double degrees = std::atan2(dy, dx) * 180.0 / std::numbers::pi;
  // floor(x + 0.5) puts each +22.5 boundary into the next sector up.
  auto k = static_cast<int>(std::floor(degrees / 45.0 + 0.5));
  k = ((k % kSectorCount) + kSectorCount) % kSectorCount;
  return static_cast<Sector>(k);
}

int DlosResult::count() const {
  return static_cast<int>(std::count_if(sectors.begin(), sectors.end(),
                                        [](const auto& n) { return n.has_value(); }));
}

DlosResult dlos_neighbors(int source_id, const Document& doc) {
  const auto& segs = doc.segments;
  const BBox& src = segs.at(static_cast<std::size_t>(source_id)).bbox;

  struct Candidate {
    double distance;
    int id;
  };
  std::vector<Candidate> candidates;
  candidates.reserve(segs.size());
  for (const auto& s : segs) {
    if (s.id == source_id || centers_coincide(src, s.bbox)) continue;
    candidates.push_back({rect_distance(src, s.bbox), s.id});
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return a.distance != b.distance ? a.distance < b.distance : a.id < b.id;
  });

  // Walk outward by distance; the first hit in each sector wins.
  DlosResult result;
  int filled = 0;
  for (const auto& c : candidates) {
    auto& slot = result.sectors[sector_index(direction_sector(src, segs[static_cast<std::size_t>(c.id)].bbox))];
    if (slot) continue;
    slot = Neighbor{c.id, c.distance};
    if (++filled == kSectorCount) break;
  }
  return result;
}

DlosResult dlos_brute_force(int source_id, const Document& doc) {
  const auto& segs = doc.segments;
  const BBox& src = segs.at(static_cast<std::size_t>(source_id)).bbox;
  DlosResult result;
  for (int k = 0; k < kSectorCount; ++k) {
    std::optional<Neighbor> best;
    for (std::size_t v = 0; v < segs.size(); ++v) {
      const int id = static_cast<int>(v);
      if (id == source_id) continue;
      const BBox& other = segs[v].bbox;
      if (other.center_x() == src.center_x() && other.center_y() == src.center_y()) continue;
      if (sector_index(direction_sector(src, other)) != k) continue;
      const double d = rect_distance(src, other);
      if (!best || d < best->distance || (d == best->distance && id < best->target_id)) {
        best = Neighbor{id, d};
      }
    }
    result.sectors[k] = best;
  }
  return result;
}

}  // namespace docgraph
