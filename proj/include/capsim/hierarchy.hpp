#pragma once

#include <string>
#include <vector>

#include "capsim/geometry.hpp"

namespace capsim {

/// Constants of the relaying analysis. Everything follows from the minimum
/// separation, the path-loss exponent, the quantizer noise level and the
/// ambient noise floor (1 for a stand-alone network, higher when the
/// instance runs inside a larger cooperating system).
struct SchemeConstants {
  double r_min = 0;
  double alpha = 0;
  double delta_sq = 0;
  double ambient_noise = 1.0;
  double k1 = 0;  // per-squarelet node count ceiling factor
  double k2 = 0;  // dense squarelet count floor factor, 1/(2 k1)
  double k3 = 0;  // relay load ceiling factor, 4/k2
  double n0 = 0;  // ambient noise plus worst-case re-use interference
  double k4 = 0;  // multiple-access rate floor, bits per channel use
  double k5 = 0;  // multiple-access quantizer bits per message bit
  double k6 = 0;  // broadcast rate floor (set equal to k4)
  double k7 = 0;  // broadcast quantizer envelope constant
};

SchemeConstants compute_constants(double r_min, double alpha, double delta_sq,
                                  double ambient_noise = 1.0);

/// Per-level bookkeeping of the relaying hierarchy on n nodes: level count
/// L, branching factor gamma, node counts n_l = n/(2 gamma)^l, areas
/// a_l = n/gamma^l and power budgets P_l = k2 2^-l gamma.
struct HierarchyParams {
  int n = 0;
  double alpha = 0;
  double delta = 0;
  double delta_sq = 0;
  int levels = 0;  // L
  int gamma = 0;
  std::vector<double> n_l;  // size levels + 1
  std::vector<double> a_l;  // size levels + 1
  std::vector<double> p_l;  // size levels
  SchemeConstants constants;
  bool power_ok = false;      // P_l <= a_l^{alpha/2} / n_{l+1} at all levels
  double power_threshold_n = 0;  // smallest scanned n where power_ok holds
                                 // for every larger scanned n as well
};

/// L = max(1, round(log2(n)^{1/2-delta})), gamma = max(2, floor(n^{1/(L+1)}))
/// with the floor fixed up in exact integer arithmetic. Throws
/// Error("invalid-parameter") outside n >= 16, alpha > 2, delta in (0,1/2),
/// delta_sq in (0,1).
HierarchyParams build_params(int n, double alpha, double delta, double r_min,
                             double delta_sq);

/// Same bookkeeping with levels and gamma forced (diversity sweeps, the
/// adversarial classification examples, levels = 0 for pure TDMA).
/// gamma^levels must not exceed n.
HierarchyParams build_params_custom(int n, double alpha, double delta,
                                    double r_min, double delta_sq, int levels,
                                    int gamma);

/// Bookkeeping for a generic node count and region area, used when the
/// scheme runs inside a sub-square of a larger network (relay squares of
/// the cooperative multi-hop construction, with a raised ambient noise
/// floor). The stand-alone network is the node_count = area = n case.
/// Throws Error("below-threshold-n") below 16 nodes.
HierarchyParams build_params_general(double node_count, double area,
                                     double alpha, double delta, double r_min,
                                     double delta_sq, double ambient_noise);

/// Level table: level,n_l,a_l,p_l,dense_count_bound one row per level.
std::string params_table_csv(const HierarchyParams& params);

/// Dense / non-dense classification of one level's squarelet grid. A cell
/// is dense when it holds at least n_{l+1} nodes.
struct DenseSquareletReport {
  int level = 0;
  SquareletGrid grid;
  std::vector<char> dense;  // one flag per grid cell
  int dense_count = 0;
  int max_cell_count = 0;
  double dense_count_bound = 0;  // k2 2^-l gamma (guaranteed floor)
  double max_count_bound = 0;    // k1 a_l / gamma (packing ceiling)
  bool lemma_ok = false;         // both counting inequalities hold; false
                                 // flags the instance as below threshold
};

/// Grid the placement's region into ceil(sqrt(gamma))^2 squarelets and
/// classify. The placement must carry at least n_l nodes in a region of
/// area at most a_l; level must lie in [0, levels).
DenseSquareletReport classify_squarelets(const NodePlacement& p,
                                         const HierarchyParams& params,
                                         int level);

/// Sub-placement of one grid cell, translated to the origin, for descending
/// a level in the hierarchy.
NodePlacement extract_cell_placement(const NodePlacement& p,
                                     const SquareletGrid& grid, int cell_idx);

}  // namespace capsim
