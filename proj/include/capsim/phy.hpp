#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "capsim/hierarchy.hpp"
#include "capsim/interference.hpp"

namespace capsim {

/// Trial-independent state of one multiple-access column: the scheduled
/// sources, the relay cell with the antenna nodes serving it, per-source
/// normalized distances and transmit powers, and the deterministic
/// amplitude part r^{-alpha/2} of every link gain. Phases are the only
/// randomness and are redrawn per trial.
struct MacContext {
  std::vector<int> sources;
  std::vector<int> relay_nodes;  // antennas, at most floor(n_{l+1})
  Cell relay_cell;
  int level = 0;
  std::vector<double> r_tilde;  // r_{u,cell} / sqrt(2 a_l), at most 1
  std::vector<double> power;    // r_tilde^alpha a_l^{alpha/2} / antennas
  double duty_cycle = 0;        // P_l n_{l+1} a_l^{-alpha/2}
  bool sandwich_ok = false;  // 2^{-3a/2} <= |h|^2 r_tilde^a a_l^{a/2} <= 2^{-a/2}
                             // on every link
  std::vector<double> amp;   // r_{u,v}^{-alpha/2}, source-major
};

/// Builds the column state and certifies the geometric preconditions.
/// Throws Error("schedule-violation") when a source or the antenna set
/// breaks the eligibility distance.
MacContext make_mac_context(const std::vector<int>& sources,
                            const std::vector<int>& relay_cell_nodes,
                            const Cell& relay_cell,
                            const NodePlacement& placement,
                            const HierarchyParams& params, int level);

struct MacTrial {
  std::vector<double> sinr;  // per source, matched filter output
  std::vector<double> rate;  // 0.5 log2(1 + sinr)
  // |h_u^dag h_u~|^2 for u != u~, symmetric, diagonal holds ||h_u||^2.
  std::vector<std::vector<double>> cross;
};

/// One phase draw. The matched-filter SINR puts the sampled cross terms in
/// the denominator and accounts for receiver noise, worst-case spatial
/// re-use interference and quantizer distortion as the deterministic power
/// n0 + delta_sq.
MacTrial mac_sinr_trial(const MacContext& ctx, const NodePlacement& placement,
                        const HierarchyParams& params, uint64_t seed,
                        int trial);

/// Oracle for the trial cross terms: E |h_u^dag h_u~|^2 =
/// sum_v r_{u,v}^-alpha r_{u~,v}^-alpha.
double mac_cross_term_mean(const MacContext& ctx,
                           const NodePlacement& placement, double alpha,
                           int u_idx, int v_idx);

/// Trial-independent state of one broadcast row: relay antennas beamform
/// one stream per scheduled destination using phase-quantized conjugate
/// gains.
struct BcContext {
  std::vector<int> destinations;
  std::vector<int> relay_nodes;
  Cell relay_cell;
  int level = 0;
  double message_power = 0;  // K n_{l+1}^-1 a_l^{alpha/2}, K = 2^-a (1-d^2)
  double power_cap = 0;      // n_{l+1}^-1 a_l^{alpha/2} per relay node
  bool spread_ok = false;    // max_v r_{v,w} <= 2 min_v r_{v,w} per w
  std::vector<double> amp;   // r_{v,w}^{-alpha/2}, destination-major
};

BcContext make_bc_context(const std::vector<int>& destinations,
                          const std::vector<int>& relay_cell_nodes,
                          const Cell& relay_cell,
                          const NodePlacement& placement,
                          const HierarchyParams& params, int level);

struct BcTrial {
  std::vector<double> sinr;       // per destination
  std::vector<double> rate;       // 0.5 log2(1 + sinr)
  std::vector<double> alignment;  // |h_w hhat_w^dag|^2 / ||h_w||^4, in
                                  // [cos^2(pi/4), 1] on every draw
  std::vector<double> node_power;  // |xhat_v|^2 sample per relay node
};

/// One phase-and-symbol draw. Beamforming phases come from the four-point
/// codebook {0, pi/2, pi, 3pi/2}; a draw whose alignment leaves
/// [cos^2(pi/4), 1] throws Error("alignment-violation") since that bound is
/// structural, not statistical.
BcTrial bc_beamform_trial(const BcContext& ctx, const NodePlacement& placement,
                          const HierarchyParams& params, uint64_t seed,
                          int trial);

/// Expected per-relay-node transmit power of the broadcast phase:
/// sum_w |h_vw|^2/||h_w||^2 K n^-1 a^{a/2} + delta_sq per node v.
std::vector<double> bc_power_mean(const BcContext& ctx,
                                  const NodePlacement& placement,
                                  const HierarchyParams& params);

enum class QuantizerPhase { kMac, kBc };

/// Relay quantizer bookkeeping in bits per message bit: the multiple-access
/// phase costs k5 independent of n; the broadcast phase costs
/// (1/k6) log2(delta_sq^-1 2^{l+1} n^{alpha/2}).
double quantizer_cost(QuantizerPhase phase, const HierarchyParams& params,
                      int level);

}  // namespace capsim
