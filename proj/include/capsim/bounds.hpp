#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "capsim/geometry.hpp"
#include "capsim/scheduling.hpp"

namespace capsim {

/// Transmit/receive split of the node set for a cut-set evaluation.
struct Cut {
  std::vector<int> left;   // transmit side
  std::vector<int> right;  // receive side
  double line_x = -1;      // vertical cut position, negative when the cut
                           // is not a vertical line
  std::string kind;        // "vertical", "cluster-gap" or "custom"
};

/// Channel-distribution-free capacity bound across a cut: 4 max{1, G} P
/// where P sums r^-alpha over all cross pairs and G is the largest
/// receive-side column sum of the row-normalized square gains
/// |h~_{u,v}|^2 = r_{u,v}^-alpha / sum_v r_{u,v}^-alpha.
struct CutBound {
  double gain_sum = 0;         // P
  double normalized_gain = 0;  // G, at most |left| by row normalization
  double bound = 0;            // 4 max{1, G} P
  double per_pair_floor = 0;   // bound / (n/4), the guaranteed crossing
                               // count of a balanced cut
};

/// Exact geometric evaluation of the cut bound. Throws Error("empty-side")
/// when either side is empty; requires alpha > 2.
CutBound mimo_cut_bound(const NodePlacement& placement, const Cut& cut,
                        double alpha);

/// Balanced-vertical-cut converse with helper densification: one helper
/// node per empty d x d tile (d = sqrt(2 log2 n)), included in the gain
/// sums, excluded from traffic.
struct ConverseReport {
  Cut cut;                    // on the augmented placement
  CutBound left_to_right;
  CutBound right_to_left;
  int64_t crossing_lr = 0;    // traffic pairs crossing left to right
  int64_t crossing_rl = 0;
  double per_node_bound = 0;  // min over directions of bound / crossing
  int helpers_added = 0;
  double helper_tile_side = 0;
  int max_unit_square_count = 0;
  bool unit_density_ok = false;      // <= log2(n) nodes per unit square
  bool helper_occupancy_ok = false;  // every helper tile occupied after
                                     // augmentation
  bool theorem_regime = false;       // alpha in (2, 3]
};

/// Sweeps half-integer vertical cut positions for the one balancing both
/// sides to at least n/4 nodes, then evaluates the bound in both
/// directions. Throws Error("no-balanced-cut") when no position balances.
ConverseReport converse_cut(const NodePlacement& placement, double alpha,
                            const TrafficMatrix& traffic);

/// Exact cut evaluation across the engineered gap of a cluster placement.
struct GapBoundReport {
  Cut cut;
  CutBound cut_bound;
  double d_star = 0;
  double per_node_bound = 0;   // bound / (n/4)
  double predicted_shape = 0;  // d_star^{3-alpha} n^{-1/2}
  double realized_gap = 0;
};

/// Throws Error("wrong-placement-kind") unless the placement is a
/// two-cluster or gap-cluster construction. d_star = 0 adopts the
/// placement's construction resolution.
GapBoundReport adversarial_gap_bound(const NodePlacement& placement,
                                     double alpha, double d_star = 0);

}  // namespace capsim
