#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "capsim/error.hpp"
#include "capsim/rng.hpp"
#include "capsim/scheduling.hpp"
#include "doctest.h"

using namespace capsim;

TEST_CASE("traffic is a uniformly drawn permutation") {
  auto t = random_permutation_traffic(512, 11);
  REQUIRE(t.n == 512);
  auto sorted = t.pairing;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 512; ++i) CHECK(sorted[i] == i);
  // a different seed gives a different draw
  auto u = random_permutation_traffic(512, 12);
  CHECK(u.pairing != t.pairing);
  // identical seed reproduces
  CHECK(random_permutation_traffic(512, 11).pairing == t.pairing);
}

TEST_CASE("eligible relays enforce the distance threshold on both endpoints") {
  auto placement = generate_placement(PlacementKind::kLattice, 1024, 0.5, 1);
  auto params = build_params(1024, 3.0, 0.25, 0.5, 0.5);
  auto dense = classify_squarelets(placement, params, 0);
  double threshold = std::sqrt(2.0 * params.a_l[1]);
  auto t = random_permutation_traffic(1024, 3);
  for (int s = 0; s < 32; ++s) {
    const Point& src = placement.nodes[s];
    const Point& dst = placement.nodes[t.pairing[s]];
    auto cells = eligible_relays(src, dst, dense, params);
    for (int c : cells) {
      Cell cell = dense.grid.cell(c);
      CHECK(dense.dense[c]);
      CHECK(point_to_cell_distance(src, cell) >= threshold - 1e-6);
      CHECK(point_to_cell_distance(dst, cell) >= threshold - 1e-6);
    }
  }
  // a corner pair sees distant cells; a central pair sees none, because at
  // this size the eligibility radius reaches past every cell of the grid
  Point corner{0.5, 0.5};
  CHECK_FALSE(eligible_relays(corner, corner, dense, params).empty());
  Point center{15.9, 15.9};
  CHECK(eligible_relays(center, center, dense, params).empty());
}

TEST_CASE("fast decomposition reconstructs traffic and respects load bounds") {
  // relaying needs every pair to see a distant dense cell, which the default
  // branching only guarantees from roughly 2^13 nodes up
  for (uint64_t seed : {21ULL, 22ULL, 23ULL}) {
    int n = 16384;
    auto placement =
        generate_placement(PlacementKind::kUniformRandom, n, 0.5, seed);
    auto params = build_params(n, 3.0, 0.25, 0.5, 0.5);
    auto dense = classify_squarelets(placement, params, 0);
    auto traffic = random_permutation_traffic(n, seed + 100);
    auto decomp = decompose_fast(traffic, dense, placement, params);
    CHECK_FALSE(decomp.slow);
    CHECK(decomp.scale == doctest::Approx(1.0));
    auto audit = audit_decomposition(decomp, traffic, dense, placement, params);
    CHECK(audit.reconstruction_exact);
    CHECK(audit.row_sums_ok);
    CHECK(audit.loads_ok);
    CHECK(audit.distances_ok);
    CHECK(audit.orthogonal);
    CHECK(audit.count_ok);
    CHECK(audit.schedule_count <= (int)std::ceil(decomp.count_bound + 1e-9));
    size_t entries = 0;
    for (const auto& s : decomp.schedules) entries += s.entries.size();
    CHECK(entries == (size_t)n);  // every pair exactly once
  }
}

TEST_CASE("slow decomposition splits every pair over distinct relays") {
  int n = 2048;
  auto placement = generate_placement(PlacementKind::kUniformRandom, n, 0.5, 31);
  auto params = build_params_custom(n, 3.0, 0.25, 0.5, 0.5, 1, 128);
  auto dense = classify_squarelets(placement, params, 0);
  auto traffic = random_permutation_traffic(n, 32);
  auto decomp = decompose_slow(traffic, dense, placement, params);
  CHECK(decomp.slow);
  CHECK(decomp.m_star == 3);  // round(k2 gamma / 2) at gamma = 128
  CHECK(decomp.scale == doctest::Approx(1.0 / 3.0));
  auto audit = audit_decomposition(decomp, traffic, dense, placement, params);
  CHECK(audit.reconstruction_exact);
  CHECK(audit.row_sums_ok);
  CHECK(audit.loads_ok);
  CHECK(audit.distances_ok);
  CHECK(audit.orthogonal);
  CHECK(audit.count_ok);
  CHECK(audit.min_relay_diversity >= decomp.m_star);
  // every pair appears exactly m_star times, each over a distinct relay cell
  std::vector<std::set<int>> relays(n);
  std::vector<int> uses(n, 0);
  for (const auto& s : decomp.schedules)
    for (const auto& e : s.entries) {
      relays[e.source].insert(e.relay_cell);
      uses[e.source]++;
    }
  for (int i = 0; i < n; ++i) {
    CHECK(uses[i] == decomp.m_star);
    CHECK((int)relays[i].size() == decomp.m_star);
  }
}

TEST_CASE("a pair with no distant dense cell raises no-eligible-relay") {
  // every node packed into one corner cell: any relay cell is too close
  NodePlacement p;
  p.n = 16;
  p.r_min = 0.5;
  p.region_side = 4.0;
  p.kind = "custom";
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      p.nodes.push_back(Point{0.1 + 0.5 * i, 0.1 + 0.5 * j});
  auto params = build_params_custom(16, 3.0, 0.25, 0.5, 0.5, 1, 4);
  auto dense = classify_squarelets(p, params, 0);
  auto traffic = random_permutation_traffic(16, 9);
  CHECK_THROWS_WITH_AS(decompose_fast(traffic, dense, p, params),
                       doctest::Contains("no-eligible-relay"), Error);
}

TEST_CASE("schedule export lists one line per assignment plus header") {
  int n = 256;
  auto placement = generate_placement(PlacementKind::kUniformRandom, n, 0.5, 41);
  auto params = build_params_custom(n, 3.0, 0.25, 0.5, 0.5, 1, 64);
  auto dense = classify_squarelets(placement, params, 0);
  auto traffic = random_permutation_traffic(n, 42);
  auto decomp = decompose_fast(traffic, dense, placement, params);
  auto csv = schedules_csv(decomp);
  size_t lines = 0;
  for (char ch : csv) lines += (ch == '\n');
  size_t entries = 0;
  for (const auto& s : decomp.schedules) entries += s.entries.size();
  CHECK(lines == entries + 1);
  CHECK(csv.rfind("schedule,source,relay_cell,destination,weight", 0) == 0);
}
