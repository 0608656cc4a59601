#include <algorithm>
#include <cmath>

#include "capsim/error.hpp"
#include "capsim/hierarchy.hpp"
#include "capsim/interference.hpp"
#include "capsim/phy.hpp"
#include "capsim/rng.hpp"
#include "doctest.h"

using namespace capsim;

namespace {

/// Small deterministic column on the side-16 lattice: relay cell at the
/// origin, sources one cell row away but many columns to the right.
struct ColumnFixture {
  NodePlacement placement;
  HierarchyParams params;
  DenseSquareletReport dense;
  Cell relay_cell;
  std::vector<int> relay_nodes;
  std::vector<int> far_nodes;  // nodes beyond the eligibility distance

  ColumnFixture()
      : placement(generate_placement(PlacementKind::kLattice, 256, 0.5, 1)),
        params(build_params_custom(256, 3.0, 0.25, 0.5, 0.5, 1, 64)) {
    dense = classify_squarelets(placement, params, 0);
    relay_cell = dense.grid.cell(0);
    relay_nodes = dense.grid.cell_nodes[0];
    double min_dist = std::sqrt(2.0 * params.a_l[1]);
    for (int c = 0; c < dense.grid.cell_count(); ++c) {
      if (c == 0) continue;
      for (int v : dense.grid.cell_nodes[c])
        if (point_to_cell_distance(placement.nodes[v], relay_cell) >=
            min_dist * 1.000001)
          far_nodes.push_back(v);
    }
  }
};

}  // namespace

TEST_CASE("interference budget partial sums and tails") {
  auto b = interference_budget(3.0, 1);
  CHECK(b.total == doctest::Approx(65.0).epsilon(1e-12));  // 1 + 8 * 8
  CHECK(b.tail_bound == doctest::Approx(64.0).epsilon(1e-12));
  double exact = 1.0 + 64.0 * std::riemann_zeta(2.0);
  for (int cutoff : {1, 2, 4, 8, 16, 64}) {
    auto bc = interference_budget(3.0, cutoff);
    CHECK(bc.total <= exact + 1e-9);
    CHECK(bc.total + bc.tail_bound >= exact - 1e-9);
  }
  // tails shrink monotonically
  double prev = 1e300;
  for (int cutoff : {1, 2, 4, 8, 16}) {
    auto bc = interference_budget(3.0, cutoff);
    CHECK(bc.tail_bound < prev);
    prev = bc.tail_bound;
  }
  CHECK_THROWS_WITH_AS(interference_budget(2.0, 4),
                       doctest::Contains("divergence-warning"), Error);
}

TEST_CASE("mac context certifies geometry and normalizes power") {
  ColumnFixture f;
  std::vector<int> sources(f.far_nodes.begin(), f.far_nodes.begin() + 8);
  auto ctx = make_mac_context(sources, f.relay_nodes, f.relay_cell, f.placement,
                              f.params, 0);
  CHECK(ctx.sandwich_ok);
  int antennas = (int)ctx.relay_nodes.size();
  CHECK(antennas == (int)std::floor(f.params.n_l[1] + 1e-9));
  double a0 = f.params.a_l[0];
  for (size_t u = 0; u < sources.size(); ++u) {
    double dist =
        point_to_cell_distance(f.placement.nodes[sources[u]], f.relay_cell);
    double r_tilde = dist / std::sqrt(2.0 * a0);
    CHECK(ctx.r_tilde[u] == doctest::Approx(r_tilde).epsilon(1e-12));
    CHECK(ctx.r_tilde[u] <= 1.0);
    double power = std::pow(r_tilde, 3.0) * std::pow(a0, 1.5) / antennas;
    CHECK(ctx.power[u] == doctest::Approx(power).epsilon(1e-12));
  }
  CHECK(ctx.duty_cycle ==
        doctest::Approx(f.params.p_l[0] * f.params.n_l[1] *
                        std::pow(a0, -1.5))
            .epsilon(1e-12));
  // a source in the neighbouring cell is below the eligibility distance
  std::vector<int> close = sources;
  close.push_back(f.dense.grid.cell_nodes[1].front());
  CHECK_THROWS_WITH_AS(make_mac_context(close, f.relay_nodes, f.relay_cell,
                                        f.placement, f.params, 0),
                       doctest::Contains("schedule-violation"), Error);
}

TEST_CASE("sampled cross terms match the geometric oracle") {
  ColumnFixture f;
  std::vector<int> sources(f.far_nodes.begin(), f.far_nodes.begin() + 8);
  auto ctx = make_mac_context(sources, f.relay_nodes, f.relay_cell, f.placement,
                              f.params, 0);
  const int trials = 6000;
  double mean = 0, m2 = 0, rate_min = 1e300;
  for (int t = 0; t < trials; ++t) {
    auto trial = mac_sinr_trial(ctx, f.placement, f.params, 77, t);
    double x = trial.cross[0][1];
    double d = x - mean;
    mean += d / (t + 1);
    m2 += d * (x - mean);
    rate_min = std::min(rate_min,
                        *std::min_element(trial.rate.begin(), trial.rate.end()));
    // diagonal carries the squared channel norm, strictly positive
    CHECK(trial.cross[0][0] > 0);
  }
  double oracle = mac_cross_term_mean(ctx, f.placement, 3.0, 0, 1);
  CHECK(oracle ==
        doctest::Approx(mac_cross_term_mean(ctx, f.placement, 3.0, 1, 0))
            .epsilon(1e-12));
  double se = std::sqrt(m2 / (trials - 1) / trials);
  CHECK(std::fabs(mean - oracle) <= 3.5 * se);
  // the rate floor held on every single draw of this column
  CHECK(rate_min >= f.params.constants.k4 * (1 - 1e-9));
}

TEST_CASE("beamforming alignment is hard-bounded and power meets the oracle") {
  ColumnFixture f;
  std::vector<int> dests(f.far_nodes.end() - 6, f.far_nodes.end());
  auto ctx = make_bc_context(dests, f.relay_nodes, f.relay_cell, f.placement,
                             f.params, 0);
  CHECK(ctx.spread_ok);
  int antennas = (int)ctx.relay_nodes.size();
  double a0 = f.params.a_l[0];
  CHECK(ctx.message_power ==
        doctest::Approx(std::pow(2.0, -3.0) * 0.5 * std::pow(a0, 1.5) /
                        antennas)
            .epsilon(1e-12));
  CHECK(ctx.power_cap ==
        doctest::Approx(std::pow(a0, 1.5) / antennas).epsilon(1e-12));

  const int trials = 4000;
  double mean = 0, m2 = 0, min_align = 1.0;
  for (int t = 0; t < trials; ++t) {
    auto trial = bc_beamform_trial(ctx, f.placement, f.params, 78, t);
    for (double a : trial.alignment) {
      min_align = std::min(min_align, a);
      CHECK(a >= 0.5 - 1e-9);
      CHECK(a <= 1.0 + 1e-9);
    }
    double x = trial.node_power[0];
    double d = x - mean;
    mean += d / (t + 1);
    m2 += d * (x - mean);
  }
  CHECK(min_align < 1.0);  // quantization genuinely perturbs the phases
  auto oracle = bc_power_mean(ctx, f.placement, f.params);
  double se = std::sqrt(m2 / (trials - 1) / trials);
  CHECK(std::fabs(mean - oracle[0]) <= 3.5 * se);
  // sample mean respects the per-node budget plus quantizer noise
  CHECK(mean <= ctx.power_cap + f.params.delta_sq + 3.5 * se);

  // a destination inside the neighbouring cell violates the spread contract
  std::vector<int> close = dests;
  close.push_back(f.dense.grid.cell_nodes[1].front());
  CHECK_THROWS_WITH_AS(make_bc_context(close, f.relay_nodes, f.relay_cell,
                                       f.placement, f.params, 0),
                       doctest::Contains("schedule-violation"), Error);
}

TEST_CASE("quantizer bookkeeping") {
  auto params = build_params(65536, 3.0, 0.25, 0.5, 0.5);
  CHECK(quantizer_cost(QuantizerPhase::kMac, params, 0) ==
        doctest::Approx(params.constants.k5).epsilon(1e-12));
  // 2^{l+1}/delta_sq * a0^{alpha/2} = 4 * 2^24 at level 0, so 26 bits
  CHECK(quantizer_cost(QuantizerPhase::kBc, params, 0) ==
        doctest::Approx(26.0 / params.constants.k6).epsilon(1e-12));
  // the multiple-access cost does not depend on the instance size
  auto small = build_params(1024, 3.0, 0.25, 0.5, 0.5);
  CHECK(quantizer_cost(QuantizerPhase::kMac, small, 0) ==
        doctest::Approx(quantizer_cost(QuantizerPhase::kMac, params, 1))
            .epsilon(1e-12));
}
