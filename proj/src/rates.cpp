#include "capsim/rates.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "capsim/error.hpp"
#include "capsim/rng.hpp"

namespace capsim {

namespace {

constexpr double kTol = 1e-9;

/// Column-size ceilings for the slow-fading sampler; they shrink the Monte-
/// Carlo columns without touching the per-source rate floors (transmit
/// power scales with the realized antenna count).
constexpr int kSlowGroupCap = 16;
constexpr int kSlowAntennaCap = 32;

double level_wireless(const HierarchyParams& p, int level, FadingMode fading) {
  const SchemeConstants& c = p.constants;
  double area_term = std::pow(p.a_l[0], p.alpha / 2) / p.n_l[0];
  double ratio = 4 * std::pow(double(p.gamma), 1 - p.alpha / 2);
  double w = 8 * c.k3 * (1 / c.k4 + 1 / c.k6) * area_term * p.gamma *
             std::pow(ratio, level);
  if (fading == FadingMode::kSlow) {
    w *= 256 * (2.0 * p.gamma) / (c.k3 * std::pow(2.0, level));
  }
  return w;
}

double terminal_tdma_tau(const HierarchyParams& p) {
  double n_last = p.n_l[p.levels];
  double snr = n_last / (std::pow(2.0, p.alpha) * p.constants.n0 *
                         std::pow(p.a_l[p.levels], p.alpha / 2));
  return n_last / std::log2(1 + snr);
}

void fill_loss(RateReport& r, double node_count, double alpha, double delta) {
  r.loss_b = r.rho * std::pow(node_count, alpha / 2 - 1);
  double lg = std::log2(node_count);
  r.loss_c = -std::log2(r.loss_b) / std::pow(lg, 0.5 + delta);
}

int tile_index(double coord, double d_star, int tiles) {
  int idx = static_cast<int>(std::floor(coord / d_star));
  return std::min(std::max(idx, 0), tiles - 1);
}

}  // namespace

std::string fading_mode_name(FadingMode mode) {
  return mode == FadingMode::kFast ? "fast" : "slow";
}

RateReport tau_recursion(const HierarchyParams& params, FadingMode fading) {
  int levels = params.levels;
  if (params.n_l[levels] < 1 - kTol) {
    throw Error("below-threshold-n",
                "terminal squarelets average below one node");
  }
  RateReport r;
  r.scheme = "HR";
  r.fading = fading;
  r.power_ok = params.power_ok;
  r.tau.assign(levels + 1, 0);
  r.wireless.assign(levels, 0);
  r.quantizer.assign(levels, 0);

  r.tau[levels] = terminal_tdma_tau(params);
  for (int l = levels - 1; l >= 0; --l) {
    r.wireless[l] = level_wireless(params, l, fading);
    r.quantizer[l] =
        params.constants.k5 + quantizer_cost(QuantizerPhase::kBc, params, l);
    r.tau[l] = r.wireless[l] + r.quantizer[l] * r.tau[l + 1];
  }
  r.tau0 = r.tau[0];

  // Unrolled form: sum over levels of the quantizer prefix product times
  // the level's airtime, plus the full prefix times the TDMA tail.
  double prefix = 1;
  double closed = 0;
  for (int l = 0; l < levels; ++l) {
    closed += prefix * r.wireless[l];
    prefix *= r.quantizer[l];
  }
  closed += prefix * r.tau[levels];
  r.tau0_closed_form = closed;

  r.rho = 1 / r.tau0;
  fill_loss(r, params.n_l[0], params.alpha, params.delta);
  if (fading == FadingMode::kSlow && levels > 0) {
    r.slow_rate_penalty = 256;
    r.slow_sharing_penalty = 2.0 * params.gamma / params.constants.k3;
  }

  const SchemeConstants& c = params.constants;
  double node_count = params.n_l[0];
  double snr_last = params.n_l[levels] /
                    (std::pow(2.0, params.alpha) * c.n0 *
                     std::pow(params.a_l[levels], params.alpha / 2));
  double k_quant = c.k5 + c.k7;
  double x = k_quant * levels * std::log2(node_count);
  r.envelope_applicable = fading == FadingMode::kFast && levels > 0 &&
                          snr_last <= 1 + kTol && x >= 2 &&
                          params.delta_sq >= 0.5 - kTol &&
                          std::abs(params.a_l[0] - node_count) <=
                              1e-6 * node_count;
  if (r.envelope_applicable) {
    double k_tile = 8 * c.k3 * (1 / c.k4 + 1 / c.k6);
    double k_tdma = 2 * std::log(2.0) * std::pow(2.0, params.alpha) * c.n0;
    r.envelope_tau0 =
        std::pow(node_count, params.alpha / 2 - 1) * std::pow(x, levels) *
        (k_tile * std::pow(4.0, levels) * params.gamma +
         k_tdma * node_count * std::pow(double(params.gamma), -levels));
    r.envelope_ok = r.tau0 <= r.envelope_tau0 * (1 + kTol);
  }
  return r;
}

CmhReport cmh_rate(const NodePlacement& placement, double mu, double d_star,
                   const TrafficMatrix& traffic, double alpha, double delta,
                   double delta_sq) {
  if (!(mu > 0) || !(mu < 1)) {
    throw Error("invalid-parameter", "mu must lie in (0,1)");
  }
  double side = placement.region_side;
  if (!(d_star > 0) || d_star > side + kTol) {
    throw Error("invalid-parameter", "d_star must lie in (0, region side]");
  }
  double tiles_real = side / d_star;
  int tiles = static_cast<int>(llround(tiles_real));
  if (std::abs(tiles_real - tiles) > 1e-6) {
    throw Error("invalid-parameter", "d_star must tile the region side");
  }
  if (!is_regular_at(placement, mu, d_star)) {
    throw Error("not-regular",
                "placement misses " + std::to_string(mu) +
                    "-regularity at resolution " + std::to_string(d_star));
  }
  if (traffic.n != placement.n) {
    throw Error("invalid-parameter", "traffic size mismatch");
  }

  CmhReport rep;
  rep.mu = mu;
  rep.graph.tiles_per_side = tiles;
  rep.graph.d_star = d_star;

  double n = placement.n;
  rep.regularity_threshold =
      std::pow(n, (1 / (2 + alpha)) *
                      std::pow(std::log2(n), delta - 0.5));

  if (tiles == 1) {
    // One tile spanning the region: the construction collapses to the
    // plain relaying scheme on the full network.
    HierarchyParams params =
        build_params(placement.n, alpha, delta, placement.r_min, delta_sq);
    rep.rate = tau_recursion(params, FadingMode::kFast);
    rep.rate.scheme = "CMH";
    rep.rate.d_star = d_star;
    rep.graph.relay_mode = true;
    rep.graph.edge_capacity = rep.rate.rho * placement.n;
    rep.loss_b3 =
        rep.rate.rho / (std::pow(d_star, 3 - alpha) * std::pow(n, -0.5));
    return rep;
  }

  rep.graph.relay_mode = d_star >= rep.regularity_threshold * (1 - kTol);
  SchemeConstants base =
      compute_constants(placement.r_min, alpha, delta_sq, 1.0);
  if (rep.graph.relay_mode) {
    // Neighbour tiles cooperate: the relaying scheme runs over the
    // 2d* x 2d* square covering both, on its guaranteed 4 mu d*^2 nodes,
    // against ambient noise raised to the stand-alone floor (the rest of
    // the network keeps transmitting).
    HierarchyParams inner =
        build_params_general(4 * mu * d_star * d_star, 4 * d_star * d_star,
                             alpha, delta, placement.r_min, delta_sq, base.n0);
    RateReport hr = tau_recursion(inner, FadingMode::kFast);
    rep.graph.edge_capacity = hr.rho * mu * d_star * d_star / 16;
  } else {
    // Tiles too small to cooperate: one node per tile transmits at a time
    // toward a neighbour tile at distance at most 3 d*, sharing the slot
    // with the worst-case tile population.
    double snr = std::pow(3 * d_star, -alpha) / base.n0;
    rep.graph.edge_capacity = mu / (16 * base.k1) * std::log2(1 + snr);
  }

  rep.graph.vertical_load.assign(tiles, std::vector<int64_t>(tiles - 1, 0));
  rep.graph.horizontal_load.assign(tiles - 1, std::vector<int64_t>(tiles, 0));
  for (int s = 0; s < traffic.n; ++s) {
    int t = traffic.pairing[s];
    int cs = tile_index(placement.nodes[s].x, d_star, tiles);
    int rs = tile_index(placement.nodes[s].y, d_star, tiles);
    int cd = tile_index(placement.nodes[t].x, d_star, tiles);
    int rd = tile_index(placement.nodes[t].y, d_star, tiles);
    if (cs == cd && rs == rd) continue;
    ++rep.graph.routed_pairs;
    for (int row = std::min(rs, rd); row < std::max(rs, rd); ++row) {
      ++rep.graph.vertical_load[cs][row];
    }
    for (int col = std::min(cs, cd); col < std::max(cs, cd); ++col) {
      ++rep.graph.horizontal_load[col][rd];
    }
  }
  for (const auto& column : rep.graph.vertical_load) {
    for (int64_t load : column) {
      rep.graph.max_load = std::max(rep.graph.max_load, load);
    }
  }
  for (const auto& column : rep.graph.horizontal_load) {
    for (int64_t load : column) {
      rep.graph.max_load = std::max(rep.graph.max_load, load);
    }
  }

  rep.rate.scheme = "CMH";
  rep.rate.fading = FadingMode::kFast;
  rep.rate.d_star = d_star;
  rep.rate.power_ok = true;
  rep.rate.rho = rep.graph.max_load > 0
                     ? rep.graph.edge_capacity / rep.graph.max_load
                     : rep.graph.edge_capacity;
  rep.rate.tau0 = 1 / rep.rate.rho;
  rep.rate.tau0_closed_form = rep.rate.tau0;
  fill_loss(rep.rate, n, alpha, delta);
  rep.loss_b3 =
      rep.rate.rho / (std::pow(d_star, 3 - alpha) * std::pow(n, -0.5));
  return rep;
}

MhReport mh_baseline(const NodePlacement& placement, double alpha,
                     const TrafficMatrix& traffic) {
  if (placement.n < 2) {
    throw Error("invalid-parameter", "need at least two nodes");
  }
  if (traffic.n != placement.n) {
    throw Error("invalid-parameter", "traffic size mismatch");
  }
  std::vector<double> xs(placement.n);
  for (int i = 0; i < placement.n; ++i) xs[i] = placement.nodes[i].x;
  std::sort(xs.begin(), xs.end());

  MhReport rep;
  double strip_left = xs.front();
  for (size_t i = 0; i + 1 < xs.size(); ++i) {
    double gap = xs[i + 1] - xs[i];
    if (gap > rep.gap) {
      rep.gap = gap;
      strip_left = xs[i];
    }
  }
  if (rep.gap <= 0) {
    // All nodes share one x coordinate; no vertical strip separates
    // anything, so the baseline reports no gap constraint.
    rep.gap = 0;
  }

  double g = std::max(rep.gap, 1e-12);
  double direct = std::pow(g, -alpha);
  rep.gap_rho = std::min(direct, std::log2(1 + direct));

  double hop = std::max(rep.gap, 1.0);
  double hop_rate = std::min(std::pow(hop, -alpha),
                             std::log2(1 + std::pow(hop, -alpha)));
  double strip_right = strip_left + rep.gap;
  for (int i = 0; i < placement.n; ++i) {
    double x = placement.nodes[i].x;
    if (x >= strip_left - hop - kTol && x <= strip_left + kTol) {
      ++rep.transmitters;
    }
  }
  for (int s = 0; s < placement.n; ++s) {
    double xs_src = placement.nodes[s].x;
    double xs_dst = placement.nodes[traffic.pairing[s]].x;
    bool left_to_right =
        xs_src <= strip_left + kTol && xs_dst >= strip_right - kTol;
    bool right_to_left =
        xs_src >= strip_right - kTol && xs_dst <= strip_left + kTol;
    if (left_to_right || right_to_left) ++rep.crossing_pairs;
  }
  rep.load_limited_rho = hop_rate * std::max(rep.transmitters, 1) /
                         double(std::max<int64_t>(rep.crossing_pairs, 1));

  bool engineered_gap =
      placement.kind == placement_kind_name(PlacementKind::kTwoCluster) ||
      placement.kind == placement_kind_name(PlacementKind::kGapCluster);
  rep.rate.scheme = "MH";
  rep.rate.fading = FadingMode::kFast;
  rep.rate.power_ok = true;
  rep.rate.rho = engineered_gap ? rep.gap_rho : rep.load_limited_rho;
  rep.rate.tau0 = 1 / rep.rate.rho;
  rep.rate.tau0_closed_form = rep.rate.tau0;
  fill_loss(rep.rate, placement.n, alpha, 0.25);
  return rep;
}

double quarter_success_probability(int m, double p) {
  if (m < 1) throw Error("invalid-parameter", "need at least one relay");
  if (p <= 0) return 0;
  if (p >= 1) return 1;
  int need = std::max(1, static_cast<int>(std::ceil(m / 4.0 - 1e-12)));
  double total = 0;
  for (int k = need; k <= m; ++k) {
    double log_comb = std::lgamma(m + 1.0) - std::lgamma(k + 1.0) -
                      std::lgamma(m - k + 1.0);
    total += std::exp(log_comb + k * std::log(p) +
                      (m - k) * std::log(1 - p));
  }
  return std::min(total, 1.0);
}

SlowFadingReport slow_fading_success(const ScheduleDecomposition& decomp,
                                     const TrafficMatrix& traffic,
                                     const NodePlacement& placement,
                                     const HierarchyParams& params,
                                     uint64_t seed, int trials,
                                     int max_pairs) {
  if (!decomp.slow) {
    throw Error("invalid-parameter", "needs a slow-mode decomposition");
  }
  if (trials < 1 || max_pairs < 1) {
    throw Error("invalid-parameter", "need at least one trial and one pair");
  }
  DenseSquareletReport dense =
      classify_squarelets(placement, params, decomp.level);

  std::map<int, std::vector<int>> relays_of;  // source -> relay cells
  for (const Schedule& sched : decomp.schedules) {
    for (const RelayAssignment& a : sched.entries) {
      relays_of[a.source].push_back(a.relay_cell);
    }
  }

  double min_dist = std::sqrt(2 * params.a_l[decomp.level + 1]);
  const SchemeConstants& c = params.constants;
  double mac_floor = c.k4 / 64;
  double bc_floor = c.k6 / 64;
  int need =
      std::max(1, static_cast<int>(std::ceil(decomp.m_star / 4.0 - 1e-12)));

  // The lead node joins first, then squarelet mates that keep the relay
  // eligibility distance, up to the sampler's column ceiling.
  auto column_group = [&](int lead, int relay_cell) {
    std::vector<int> group = {lead};
    int cell = dense.grid.cell_index_of(placement.nodes[lead]);
    Cell target = dense.grid.cell(relay_cell);
    for (int other : dense.grid.cell_nodes[cell]) {
      if (other == lead) continue;
      if (static_cast<int>(group.size()) >= kSlowGroupCap) break;
      if (point_to_cell_distance(placement.nodes[other], target) + kTol >=
          min_dist) {
        group.push_back(other);
      }
    }
    return group;
  };

  SlowFadingReport rep;
  rep.trials = trials;
  rep.relays_per_pair = decomp.m_star;
  int64_t relay_hits = 0;
  int64_t quarter_hits = 0;
  int pair_idx = 0;
  for (const auto& [source, cells] : relays_of) {
    if (pair_idx >= max_pairs) break;
    if (static_cast<int>(cells.size()) < decomp.m_star) {
      throw Error("insufficient-diversity",
                  "pair " + std::to_string(source) + " holds " +
                      std::to_string(cells.size()) + " relays, needs " +
                      std::to_string(decomp.m_star));
    }
    int dest = traffic.pairing[source];
    std::vector<MacContext> macs;
    std::vector<BcContext> bcs;
    for (int cell : cells) {
      std::vector<int> antennas = dense.grid.cell_nodes[cell];
      if (static_cast<int>(antennas.size()) > kSlowAntennaCap) {
        antennas.resize(kSlowAntennaCap);
      }
      macs.push_back(make_mac_context(column_group(source, cell), antennas,
                                      dense.grid.cell(cell), placement, params,
                                      decomp.level));
      bcs.push_back(make_bc_context(column_group(dest, cell), antennas,
                                    dense.grid.cell(cell), placement, params,
                                    decomp.level));
    }
    for (int t = 0; t < trials; ++t) {
      int good = 0;
      for (size_t k = 0; k < cells.size(); ++k) {
        uint64_t relay_seed =
            derive_seed(seed, kStreamSuccess, uint64_t(pair_idx),
                        uint64_t(k));
        MacTrial mac =
            mac_sinr_trial(macs[k], placement, params, relay_seed, t);
        BcTrial bc = bc_beamform_trial(bcs[k], placement, params, relay_seed, t);
        if (mac.rate[0] >= mac_floor && bc.rate[0] >= bc_floor) ++good;
      }
      relay_hits += good;
      if (good >= need) ++quarter_hits;
    }
    ++pair_idx;
  }
  if (pair_idx == 0) {
    throw Error("insufficient-diversity", "decomposition schedules no pairs");
  }

  rep.pairs_sampled = pair_idx;
  int64_t sessions = int64_t(pair_idx) * trials;
  rep.mean_relay_success =
      double(relay_hits) / (double(sessions) * decomp.m_star);
  rep.quarter_success = double(quarter_hits) / double(sessions);
  rep.failure = 1 - rep.quarter_success;
  rep.binomial_prediction =
      quarter_success_probability(decomp.m_star, rep.mean_relay_success);
  double floor_failure = std::max(rep.failure, 1.0 / double(sessions + 1));
  rep.fitted_k = -std::log(floor_failure) /
                 (std::pow(2.0, -decomp.level) * params.gamma);
  return rep;
}

}  // namespace capsim
