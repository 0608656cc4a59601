#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "capsim/hierarchy.hpp"
#include "capsim/phy.hpp"
#include "capsim/scheduling.hpp"

namespace capsim {

enum class FadingMode { kFast, kSlow };

std::string fading_mode_name(FadingMode mode);

/// End-to-end rate accounting for one scheme on one instance. tau values
/// are channel uses per bit, rho = 1/tau_0 is bits per channel use per
/// node, all logs base 2.
struct RateReport {
  std::string scheme;  // "HR", "CMH" or "MH"
  FadingMode fading = FadingMode::kFast;
  std::vector<double> tau;       // tau_0 .. tau_L (relaying recursion only)
  std::vector<double> wireless;  // per-level airtime term of the recursion
  std::vector<double> quantizer;  // per-level bits-per-bit multiplier
  double tau0 = 0;
  double tau0_closed_form = 0;  // unrolled sum-product, equals tau0
  double rho = 0;
  double loss_b = 0;  // rho / n^{1 - alpha/2}
  double loss_c = 0;  // rho = n^{1-alpha/2 - c log2(n)^{delta-1/2}}
  // Slow fading inflates every per-level airtime term by
  // rate_penalty * sharing_penalty(l); both factors reported.
  double slow_rate_penalty = 1;      // 256: quarter relays at 1/64 rate
  double slow_sharing_penalty = 1;   // 2 gamma / k3 at level 0
  // Airtime envelope n^{a/2-1} (K L log2 n)^L (Kt 4^L gamma + Kp n gamma^-L)
  // with K = k5 + k7, Kt = 8 k3 (1/k4 + 1/k6), Kp = 2 ln2 2^a n0. Valid
  // when the terminal TDMA snr is at most 1 and K L log2 n >= 2.
  double envelope_tau0 = 0;
  bool envelope_applicable = false;
  bool envelope_ok = false;
  bool power_ok = false;
  double d_star = 0;        // CMH tile side, 0 elsewhere
  double success_prob = -1;  // slow fading quarter-success, -1 when not run
};

/// Evaluates the relaying recursion on prebuilt hierarchy parameters:
/// tau_l = wireless_l + quantizer_l tau_{l+1} down from the TDMA
/// termination tau_L = n_L / log2(1 + n_L / (2^alpha n0 a_L^{alpha/2})).
/// Throws Error("below-threshold-n") when any level runs out of nodes.
RateReport tau_recursion(const HierarchyParams& params, FadingMode fading);

/// Tile graph of the cooperative multi-hop scheme: vertices are d_star
/// sided tiles, edges join side-sharing neighbours, loads come from
/// routing the traffic matrix row-first (vertical leg in the source
/// column) then column-second (horizontal leg in the destination row).
struct GridGraph {
  int tiles_per_side = 0;
  double d_star = 0;
  double edge_capacity = 0;  // equal across edges by construction
  bool relay_mode = false;   // true: in-tile cooperation; false: tile TDMA
  // load[vertical][col][row] counts flows on the edge leaving (col,row)
  // upward (vertical) or rightward (horizontal).
  std::vector<std::vector<int64_t>> vertical_load;
  std::vector<std::vector<int64_t>> horizontal_load;
  int64_t max_load = 0;
  int64_t routed_pairs = 0;  // pairs whose endpoints fall in distinct tiles
};

struct CmhReport {
  RateReport rate;
  GridGraph graph;
  double mu = 0;
  double regularity_threshold = 0;  // tile side above which tiles cooperate
  double loss_b3 = 0;  // rho / (d_star^{3-alpha} n^{-1/2})
};

/// Cooperative multi-hop rate at tile side d_star, which must divide the
/// region side. Tiles above the cooperation threshold run the relaying
/// scheme over 2d_star sided squares (4 mu d_star^2 nodes, ambient noise
/// raised to the stand-alone noise floor); smaller tiles fall back to
/// node-at-a-time TDMA toward neighbour tiles. A single tile degenerates
/// to the plain relaying scheme. Throws Error("not-regular") when the
/// placement misses mu-regularity at d_star.
CmhReport cmh_rate(const NodePlacement& placement, double mu, double d_star,
                   const TrafficMatrix& traffic, double alpha, double delta,
                   double delta_sq);

/// Widest-empty-vertical-strip baseline for plain multi-hop. gap_rho caps
/// the rate of any single transmission crossing the strip
/// (min(g^-alpha, log2(1 + g^-alpha))); load_limited_rho additionally
/// shares the strip-adjacent transmitters across all crossing flows. The
/// headline rho is gap_rho on engineered gap placements (two-cluster,
/// gap-cluster), where every crossing flow gets its own transmission
/// opportunity, and load_limited_rho otherwise.
struct MhReport {
  RateReport rate;
  double gap = 0;        // widest empty vertical strip width
  double gap_rho = 0;
  double load_limited_rho = 0;
  int64_t crossing_pairs = 0;
  int transmitters = 0;  // nodes within one hop left of the strip
};

MhReport mh_baseline(const NodePlacement& placement, double alpha,
                     const TrafficMatrix& traffic);

/// P(X >= ceil(m/4)) for X ~ Binomial(m, p): the exact oracle for the
/// quarter-success estimator.
double quarter_success_probability(int m, double p);

/// Slow-fading diversity over a slow-mode decomposition: for sampled pairs,
/// one phase draw per (relay, session) decides the event that the relay
/// sustains a 1/64 fraction of both rate floors for the pair's column; the
/// estimate is the probability that at least a quarter of the pair's relays
/// succeed.
struct SlowFadingReport {
  int pairs_sampled = 0;
  int trials = 0;
  int relays_per_pair = 0;          // m_star of the decomposition
  double mean_relay_success = 0;    // per-relay event frequency
  double quarter_success = 0;       // fraction of sessions with >= m*/4
  double failure = 0;               // 1 - quarter_success
  double binomial_prediction = 0;   // oracle at the measured relay rate
  double fitted_k = 0;              // failure <= exp(-k 2^-l gamma)
};

SlowFadingReport slow_fading_success(const ScheduleDecomposition& decomp,
                                     const TrafficMatrix& traffic,
                                     const NodePlacement& placement,
                                     const HierarchyParams& params,
                                     uint64_t seed, int trials,
                                     int max_pairs);

}  // namespace capsim
