#include <cmath>
#include <random>

#include "doctest.h"
#include "docgraph/geometry.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace docgraph;
using testing::error_code;

namespace {

// Box whose centre is (cx, cy).
BBox centred(double cx, double cy, double half = 2) { return {cx - half, cy - half, cx + half, cy + half}; }

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("rect_distance hand cases") {
  CHECK(rect_distance({0, 0, 10, 10}, {5, 5, 20, 20}) == 0.0);
  CHECK(rect_distance({0, 0, 10, 10}, {40, 0, 50, 10}) == 30.0);
  CHECK(rect_distance({0, 0, 10, 10}, {40, 50, 60, 70}) == 50.0);
  CHECK(rect_distance({0, 0, 10, 10}, {10, 0, 20, 10}) == 0.0);  // touching
}

TEST_CASE("rect_distance matches the nine-region oracle") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> pos(-500, 500), ext(0, 200);
  for (int i = 0; i < 1000; ++i) {
    const double ax = pos(rng), ay = pos(rng), bx = pos(rng), by = pos(rng);
    const BBox a{ax, ay, ax + ext(rng), ay + ext(rng)};
    const BBox b{bx, by, bx + ext(rng), by + ext(rng)};
    const double d = rect_distance(a, b);
    CHECK(std::fabs(d - oracle::rect_distance_9region(a, b)) <= 1e-9);
    CHECK(d == rect_distance(b, a));
  }
}

TEST_CASE("rect_distance symmetry, identity, scaling and translation") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> pos(0, 900), ext(0, 80);
  for (int i = 0; i < 200; ++i) {
    const BBox a{pos(rng), pos(rng), 0, 0};
    const BBox b{pos(rng), pos(rng), 0, 0};
    BBox aa{a.x1, a.y1, a.x1 + ext(rng), a.y1 + ext(rng)};
    BBox bb{b.x1, b.y1, b.x1 + ext(rng), b.y1 + ext(rng)};
    CHECK(rect_distance(aa, aa) == 0.0);
    const double d = rect_distance(aa, bb);
    const double s = 2.5, tx = 13, ty = -7;
    auto scale = [&](BBox x) { return BBox{s * x.x1, s * x.y1, s * x.x2, s * x.y2}; };
    auto shift = [&](BBox x) { return BBox{x.x1 + tx, x.y1 + ty, x.x2 + tx, x.y2 + ty}; };
    CHECK(rect_distance(scale(aa), scale(bb)) == doctest::Approx(s * d).epsilon(1e-12));
    CHECK(rect_distance(shift(aa), shift(bb)) == doctest::Approx(d).epsilon(1e-12));
    if (!centers_coincide(aa, bb)) {
      CHECK(direction_sector(scale(aa), scale(bb)) == direction_sector(aa, bb));
      CHECK(direction_sector(shift(aa), shift(bb)) == direction_sector(aa, bb));
    }
  }
}

TEST_CASE("direction_sector examples") {
  CHECK(direction_sector(centred(5, 5), centred(25, 5)) == Sector::E);
  CHECK(direction_sector(centred(5, 5), centred(5, 25)) == Sector::S);
  CHECK(direction_sector(centred(5, 5), centred(15, -5)) == Sector::NE);
  CHECK(direction_sector(centred(5, 5), centred(5, -15)) == Sector::N);
  CHECK(direction_sector(centred(5, 5), centred(-15, 5)) == Sector::W);
  CHECK(direction_sector(centred(5, 5), centred(-5, 15)) == Sector::SW);
  CHECK(direction_sector(centred(5, 5), centred(-5, -5)) == Sector::NW);
  CHECK(direction_sector(centred(5, 5), centred(15, 15)) == Sector::SE);
  CHECK(error_code([] { direction_sector(centred(5, 5), centred(5, 5, 4)); }) == ErrorCode::CoincidentCenters);
}

TEST_CASE("direction_sector boundaries are half-open") {
  const double t = std::tan(22.5 * std::acos(-1.0) / 180.0);
  // Just below and just above the E/NE boundary.
  CHECK(direction_sector(centred(0, 0), centred(1000, -1000 * t + 1e-6)) == Sector::E);
  CHECK(direction_sector(centred(0, 0), centred(1000, -1000 * t - 1e-6)) == Sector::NE);
  // -22.5 degrees belongs to sector 0, just past it to sector 7.
  CHECK(direction_sector(centred(0, 0), centred(1000, 1000 * t - 1e-6)) == Sector::E);
  CHECK(direction_sector(centred(0, 0), centred(1000, 1000 * t + 1e-6)) == Sector::SE);
}

TEST_CASE("dlos_neighbors on a row of three") {
  const Document doc = testing::row_document();
  for (auto fn : {&dlos_neighbors, &dlos_brute_force}) {
    const DlosResult b = fn(1, doc);
    CHECK(b.count() == 2);
    REQUIRE(b[Sector::E]);
    REQUIRE(b[Sector::W]);
    CHECK(*b[Sector::E] == Neighbor{2, 30});
    CHECK(*b[Sector::W] == Neighbor{0, 30});
    const DlosResult a = fn(0, doc);
    CHECK(a.count() == 1);
    CHECK(a[Sector::E]->target_id == 1);
  }
}

TEST_CASE("dlos_neighbors degenerate and stacked documents") {
  const Document single = testing::make_doc({{0, 0, 10, 10}});
  CHECK(dlos_neighbors(0, single).count() == 0);
  CHECK(dlos_brute_force(0, single).count() == 0);

  const Document stacked = testing::make_doc({{0, 0, 20, 10}, {0, 30, 20, 40}});
  for (auto fn : {&dlos_neighbors, &dlos_brute_force}) {
    const DlosResult a = fn(0, stacked), b = fn(1, stacked);
    CHECK(a.count() == 1);
    CHECK(b.count() == 1);
    CHECK(a[Sector::S]->target_id == 1);
    CHECK(b[Sector::N]->target_id == 0);
  }

  // Same centre: skipped, not an error.
  const Document nested = testing::make_doc({{0, 0, 20, 20}, {5, 5, 15, 15}, {50, 5, 60, 15}});
  const DlosResult n = dlos_neighbors(0, nested);
  CHECK(n.count() == 1);
  CHECK(n[Sector::E]->target_id == 2);
}

TEST_CASE("ties go to the smaller id") {
  // Two boxes at the same gap inside the East sector.
  const Document doc = testing::make_doc({{0, 0, 10, 10}, {30, 4, 40, 8}, {30, 2, 40, 6}});
  CHECK(dlos_neighbors(0, doc)[Sector::E]->target_id == 1);
  CHECK(dlos_brute_force(0, doc)[Sector::E]->target_id == 1);
}

TEST_CASE("dlos_neighbors agrees with the brute-force scan") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Document doc = testing::random_document(seed, 50);
    for (int u = 0; u < 50; ++u) {
      const DlosResult fast = dlos_neighbors(u, doc);
      CHECK(fast == dlos_brute_force(u, doc));
      CHECK(fast.count() <= 8);
    }
  }
}

TEST_CASE("relabelling nodes keeps empty sectors and neighbour geometry") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Document doc = testing::random_document(seed, 30);
    Document reversed = doc;
    for (int i = 0; i < 30; ++i) {
      reversed.segments[29 - i] = doc.segments[i];
      reversed.segments[29 - i].id = 29 - i;
    }
    for (int u = 0; u < 30; ++u) {
      const DlosResult a = dlos_neighbors(u, doc);
      const DlosResult b = dlos_neighbors(29 - u, reversed);
      for (int k = 0; k < kSectorCount; ++k) {
        REQUIRE(a.sectors[k].has_value() == b.sectors[k].has_value());
        if (a.sectors[k]) CHECK(a.sectors[k]->distance == b.sectors[k]->distance);
      }
    }
  }
}

TEST_CASE("sector names and indices") {
  CHECK(sector_name(Sector::E) == "E");
  CHECK(sector_name(Sector::SE) == "SE");
  for (int k = 0; k < kSectorCount; ++k) CHECK(sector_index(sector_from_index(k)) == k);
}

}  // TEST_SUITE
