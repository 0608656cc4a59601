#include "capsim/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "capsim/error.hpp"

namespace capsim {

namespace {

constexpr double kTol = 1e-9;

/// r^-alpha from the squared distance, with fast paths for the even
/// exponents the sweeps lean on.
double inverse_power(double dist_sq, double alpha) {
  if (alpha == 4.0) return 1 / (dist_sq * dist_sq);
  if (alpha == 3.0) return 1 / (dist_sq * std::sqrt(dist_sq));
  return std::pow(dist_sq, -alpha / 2);
}

double dist_sq(const Point& a, const Point& b) {
  double dx = a.x - b.x;
  double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

}  // namespace

CutBound mimo_cut_bound(const NodePlacement& placement, const Cut& cut,
                        double alpha) {
  if (cut.left.empty() || cut.right.empty()) {
    throw Error("empty-side", "both cut sides need at least one node");
  }
  if (!(alpha > 2)) {
    throw Error("invalid-parameter", "alpha must exceed 2");
  }
  size_t nl = cut.left.size();
  size_t nr = cut.right.size();
  std::vector<double> row(nr);
  std::vector<double> column_gain(nr, 0);
  CutBound out;
  for (size_t i = 0; i < nl; ++i) {
    const Point& u = placement.nodes[cut.left[i]];
    double row_sum = 0;
    for (size_t j = 0; j < nr; ++j) {
      double g = inverse_power(dist_sq(u, placement.nodes[cut.right[j]]),
                               alpha);
      row[j] = g;
      row_sum += g;
    }
    out.gain_sum += row_sum;
    for (size_t j = 0; j < nr; ++j) column_gain[j] += row[j] / row_sum;
  }
  out.normalized_gain =
      *std::max_element(column_gain.begin(), column_gain.end());
  out.bound = 4 * std::max(1.0, out.normalized_gain) * out.gain_sum;
  out.per_pair_floor = out.bound / std::max(1.0, placement.n / 4.0);
  return out;
}

ConverseReport converse_cut(const NodePlacement& placement, double alpha,
                            const TrafficMatrix& traffic) {
  if (traffic.n != placement.n) {
    throw Error("invalid-parameter", "traffic size mismatch");
  }
  int n = placement.n;
  ConverseReport rep;
  rep.theorem_regime = alpha > 2 && alpha <= 3;
  rep.helper_tile_side = std::sqrt(2 * std::log2(double(n)));

  // Proof condition 1: no unit square is overcrowded.
  {
    int cells = std::max(1, static_cast<int>(std::ceil(placement.region_side)));
    std::vector<int> counts(size_t(cells) * cells, 0);
    for (const Point& p : placement.nodes) {
      int cx = std::min(cells - 1, std::max(0, int(std::floor(p.x))));
      int cy = std::min(cells - 1, std::max(0, int(std::floor(p.y))));
      ++counts[size_t(cy) * cells + cx];
    }
    rep.max_unit_square_count =
        *std::max_element(counts.begin(), counts.end());
    rep.unit_density_ok = rep.max_unit_square_count <= std::log2(double(n)) + kTol;
  }

  // Helper densification: one node at the centre of every empty tile.
  NodePlacement augmented = placement;
  augmented.kind = placement.kind + "-augmented";
  {
    double d = rep.helper_tile_side;
    int tiles = std::max(1, static_cast<int>(std::ceil(placement.region_side / d)));
    std::vector<char> occupied(size_t(tiles) * tiles, 0);
    for (const Point& p : placement.nodes) {
      int cx = std::min(tiles - 1, std::max(0, int(std::floor(p.x / d))));
      int cy = std::min(tiles - 1, std::max(0, int(std::floor(p.y / d))));
      occupied[size_t(cy) * tiles + cx] = 1;
    }
    for (int cy = 0; cy < tiles; ++cy) {
      for (int cx = 0; cx < tiles; ++cx) {
        if (occupied[size_t(cy) * tiles + cx]) continue;
        double x = std::min((cx + 0.5) * d, placement.region_side);
        double y = std::min((cy + 0.5) * d, placement.region_side);
        augmented.nodes.push_back({x, y});
        ++rep.helpers_added;
      }
    }
    augmented.n = static_cast<int>(augmented.nodes.size());
    rep.helper_occupancy_ok = true;  // by construction every tile now holds
                                     // at least one node
  }

  // Balanced half-integer vertical cut: maximize the smaller side.
  int side = std::max(1, static_cast<int>(std::ceil(placement.region_side)));
  double best_pos = -1;
  int best_min = -1;
  for (int k = 0; k < side; ++k) {
    double pos = k + 0.5;
    int left = 0;
    for (const Point& p : placement.nodes) left += p.x < pos;
    int lo = std::min(left, n - left);
    if (lo > best_min) {
      best_min = lo;
      best_pos = pos;
    }
  }
  if (best_min < n / 4) {
    throw Error("no-balanced-cut",
                "best split leaves only " + std::to_string(best_min) +
                    " nodes on the smaller side");
  }

  rep.cut.kind = "vertical";
  rep.cut.line_x = best_pos;
  for (int i = 0; i < augmented.n; ++i) {
    (augmented.nodes[i].x < best_pos ? rep.cut.left : rep.cut.right)
        .push_back(i);
  }
  Cut reversed;
  reversed.kind = rep.cut.kind;
  reversed.line_x = best_pos;
  reversed.left = rep.cut.right;
  reversed.right = rep.cut.left;
  rep.left_to_right = mimo_cut_bound(augmented, rep.cut, alpha);
  rep.right_to_left = mimo_cut_bound(augmented, reversed, alpha);

  for (int s = 0; s < n; ++s) {
    bool src_left = placement.nodes[s].x < best_pos;
    bool dst_left = placement.nodes[traffic.pairing[s]].x < best_pos;
    if (src_left && !dst_left) ++rep.crossing_lr;
    if (!src_left && dst_left) ++rep.crossing_rl;
  }
  rep.per_node_bound = std::numeric_limits<double>::infinity();
  if (rep.crossing_lr > 0) {
    rep.per_node_bound = std::min(rep.per_node_bound,
                                  rep.left_to_right.bound / rep.crossing_lr);
  }
  if (rep.crossing_rl > 0) {
    rep.per_node_bound = std::min(rep.per_node_bound,
                                  rep.right_to_left.bound / rep.crossing_rl);
  }
  return rep;
}

GapBoundReport adversarial_gap_bound(const NodePlacement& placement,
                                     double alpha, double d_star) {
  bool two_cluster =
      placement.kind == placement_kind_name(PlacementKind::kTwoCluster);
  bool gap_cluster =
      placement.kind == placement_kind_name(PlacementKind::kGapCluster);
  if (!two_cluster && !gap_cluster) {
    throw Error("wrong-placement-kind",
                "need a two-cluster or gap-cluster placement, got '" +
                    placement.kind + "'");
  }
  GapBoundReport rep;
  rep.d_star = d_star > 0 ? d_star : placement.claimed_d_star;
  if (!(rep.d_star > 0)) {
    throw Error("invalid-parameter", "no construction resolution available");
  }

  // The construction leaves [ (side - d*)/2, side/2 ] empty: everything
  // left of the strip forms the transmit cluster.
  double side = placement.region_side;
  double strip_left = (side - rep.d_star) / 2;
  double strip_right = side / 2;
  rep.cut.kind = "cluster-gap";
  rep.cut.line_x = (strip_left + strip_right) / 2;
  double left_max = 0, right_min = side;
  for (int i = 0; i < placement.n; ++i) {
    double x = placement.nodes[i].x;
    if (x <= strip_left + kTol) {
      rep.cut.left.push_back(i);
      left_max = std::max(left_max, x);
    } else if (x >= strip_right - kTol) {
      rep.cut.right.push_back(i);
      right_min = std::min(right_min, x);
    } else {
      throw Error("wrong-placement-kind",
                  "node inside the construction gap");
    }
  }
  rep.realized_gap = right_min - left_max;
  rep.cut_bound = mimo_cut_bound(placement, rep.cut, alpha);
  rep.per_node_bound = rep.cut_bound.bound / std::max(1.0, placement.n / 4.0);
  rep.predicted_shape =
      std::pow(rep.d_star, 3 - alpha) / std::sqrt(double(placement.n));
  return rep;
}

}  // namespace capsim
