#include <cmath>
#include <filesystem>

#include "capsim/error.hpp"
#include "capsim/geometry.hpp"
#include "capsim/rng.hpp"
#include "doctest.h"

using namespace capsim;

namespace {

NodePlacement custom(std::vector<Point> pts, double side) {
  NodePlacement p;
  p.nodes = std::move(pts);
  p.n = static_cast<int>(p.nodes.size());
  p.r_min = 0.5;
  p.region_side = side;
  p.kind = "custom";
  return p;
}

}  // namespace

TEST_CASE("axis_cell_index boundary ties go to the lower cell") {
  CHECK(axis_cell_index(0.0, 1.0, 4) == 0);
  CHECK(axis_cell_index(0.5, 1.0, 4) == 0);
  CHECK(axis_cell_index(1.0, 1.0, 4) == 0);  // shared edge, lower index
  CHECK(axis_cell_index(1.5, 1.0, 4) == 1);
  CHECK(axis_cell_index(4.0, 1.0, 4) == 3);  // top edge stays in range
  CHECK(axis_cell_index(-0.5, 1.0, 4) == 0);
  CHECK(axis_cell_index(9.0, 1.0, 4) == 3);
}

TEST_CASE("point_to_cell_distance on hand geometry") {
  Cell cell{1.0, 1.0, 2.0};
  CHECK(point_to_cell_distance(Point{2.0, 2.0}, cell) == doctest::Approx(0.0));
  CHECK(point_to_cell_distance(Point{2.0, 0.0}, cell) == doctest::Approx(1.0));
  CHECK(point_to_cell_distance(Point{0.0, 0.0}, cell) ==
        doctest::Approx(std::sqrt(2.0)));
  CHECK(point_to_cell_distance(Point{5.0, 2.0}, cell) == doctest::Approx(2.0));
  CHECK(point_to_cell_distance(Point{1.0, 1.0}, cell) == doctest::Approx(0.0));
}

TEST_CASE("grid_side_for_gamma is the ceiling of the square root") {
  CHECK(grid_side_for_gamma(10) == 4);
  CHECK(grid_side_for_gamma(16) == 4);
  CHECK(grid_side_for_gamma(17) == 5);
  CHECK(grid_side_for_gamma(2) == 2);
}

TEST_CASE("build_grid partitions the node set") {
  auto p = generate_placement(PlacementKind::kUniformRandom, 200, 0.5, 4242);
  auto grid = build_grid(p, 5);
  CHECK(grid.cells_per_side == 5);
  CHECK(grid.cell_count() == 25);
  size_t total = 0;
  for (int c = 0; c < grid.cell_count(); ++c) {
    total += grid.cell_nodes[c].size();
    for (int v : grid.cell_nodes[c])
      CHECK(grid.cell_index_of(p.nodes[v]) == c);
  }
  CHECK(total == 200);
}

TEST_CASE("placement generators respect separation and region bounds") {
  for (auto kind : {PlacementKind::kUniformRandom, PlacementKind::kLattice,
                    PlacementKind::kTwoCluster}) {
    auto p = generate_placement(kind, 100, 0.5, 99);
    CHECK(p.n == 100);
    CHECK_NOTHROW(validate_placement(p));
    CHECK(min_pairwise_distance_exhaustive(p) >= 0.5 - 1e-9);
  }
  auto gp = generate_placement(PlacementKind::kGapCluster, 64, 0.5, 99, 2.0);
  CHECK_NOTHROW(validate_placement(gp));
  CHECK(min_pairwise_distance_exhaustive(gp) >= 0.5 - 1e-9);
  CHECK(gp.claimed_d_star == doctest::Approx(2.0));
}

TEST_CASE("generator guards") {
  CHECK_THROWS_AS(generate_placement(PlacementKind::kUniformRandom, 2, 0.5, 1),
                  Error);
  CHECK_THROWS_AS(generate_placement(PlacementKind::kUniformRandom, 64, 1.5, 1),
                  Error);
  // 3 cells would leave the gap off the midline; 5 cells do not tile evenly.
  CHECK_THROWS_AS(
      generate_placement(PlacementKind::kGapCluster, 64, 0.5, 1, 8.0 / 3.0),
      Error);
  CHECK_THROWS_AS(generate_placement(PlacementKind::kGapCluster, 64, 0.5, 1, 6.0),
                  Error);
}

TEST_CASE("lattice sits on unit-cell centers and is regular at every dyadic d") {
  auto p = generate_placement(PlacementKind::kLattice, 256, 0.5, 1);
  CHECK(p.nodes[0].x == doctest::Approx(0.5));
  CHECK(p.nodes[0].y == doctest::Approx(0.5));
  CHECK(is_regular_at(p, 1.0, 1.0));  // exactly one node per unit tile
  for (double d : {1.0, 2.0, 4.0, 8.0, 16.0}) CHECK(is_regular_at(p, 0.5, d));
  auto prof = regularity_resolution(p, 0.5);
  CHECK(prof.d_star == doctest::Approx(1.0));
}

TEST_CASE("is_regular_at flags an empty tile and rejects non-tiling d") {
  auto p = custom({{0.25, 0.25}, {1.25, 0.25}, {0.25, 1.25}}, 2.0);
  CHECK_FALSE(is_regular_at(p, 0.5, 1.0));  // tile [1,2)x[1,2) is empty
  CHECK(is_regular_at(p, 0.5, 2.0));        // the full square holds 3 >= 2
  CHECK_THROWS_AS(is_regular_at(p, 0.5, 0.7), Error);
}

TEST_CASE("gap cluster is regular exactly down to the claimed resolution") {
  auto p = generate_placement(PlacementKind::kGapCluster, 256, 0.5, 31, 4.0);
  CHECK(is_regular_at(p, 0.5, 4.0));
  CHECK_FALSE(is_regular_at(p, 0.5, 2.0));  // the gap column tile is empty
  auto prof = regularity_resolution(p, 0.5);
  CHECK(prof.d_star == doctest::Approx(4.0));
}

TEST_CASE("cluster placements leave the constructed strip empty") {
  auto p = generate_placement(PlacementKind::kTwoCluster, 256, 0.5, 17);
  double side = p.region_side;
  double d = p.claimed_d_star;
  CHECK(d == doctest::Approx(side / 2));
  double lo = (side - d) / 2;
  double hi = side / 2;
  for (const Point& q : p.nodes) CHECK((q.x <= lo + 1e-12 || q.x >= hi - 1e-12));
}

TEST_CASE("regularity_resolution rejects mu outside (0,1]") {
  auto p = generate_placement(PlacementKind::kLattice, 64, 0.5, 1);
  CHECK_THROWS_AS(regularity_resolution(p, 0.0), Error);
  CHECK_THROWS_AS(regularity_resolution(p, 1.5), Error);
}

TEST_CASE("placement file round trip") {
  auto p = generate_placement(PlacementKind::kUniformRandom, 50, 0.5, 7);
  auto path = std::filesystem::temp_directory_path() / "capsim_placement.txt";
  save_placement(p, path.string());
  auto q = load_placement(path.string());
  REQUIRE(q.n == p.n);
  CHECK(q.r_min == doctest::Approx(p.r_min));
  for (int i = 0; i < p.n; ++i) {
    CHECK(q.nodes[i].x == doctest::Approx(p.nodes[i].x).epsilon(1e-12));
    CHECK(q.nodes[i].y == doctest::Approx(p.nodes[i].y).epsilon(1e-12));
  }
  std::filesystem::remove(path);
}

TEST_CASE("validate_placement catches violations") {
  auto close = custom({{0.0, 0.0}, {0.3, 0.0}}, 4.0);
  close.n = 2;
  CHECK_THROWS_AS(validate_placement(close), Error);
  auto outside = custom({{0.0, 0.0}, {5.0, 0.0}}, 4.0);
  CHECK_THROWS_AS(validate_placement(outside), Error);
}
