#include "capsim/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>

#include "capsim/error.hpp"
#include "capsim/interference.hpp"

namespace capsim {

namespace {

constexpr double kCountTol = 1e-9;

/// g^e without drifting through pow(); overflow saturates, which is fine
/// because we only compare against n.
uint64_t ipow_sat(uint64_t g, int e) {
  uint64_t r = 1;
  for (int i = 0; i < e; ++i) {
    if (r > UINT64_MAX / g) return UINT64_MAX;
    r *= g;
  }
  return r;
}

/// Largest g >= 2 with g^e <= n. pow() alone misses exact roots (40^3 at
/// n = 64000 comes back 39.999...), so fix the floor up exactly.
int integer_root_floor(int n, int e) {
  int g = static_cast<int>(std::floor(std::pow(double(n), 1.0 / e)));
  if (g < 2) g = 2;
  while (ipow_sat(g + 1, e) <= uint64_t(n)) ++g;
  while (g > 2 && ipow_sat(g, e) > uint64_t(n)) --g;
  return g;
}

int level_count(int n, double delta) {
  double raw = std::pow(std::log2(double(n)), 0.5 - delta);
  return std::max<int>(1, llround(raw));
}

void fill_levels(HierarchyParams& p, double node_count, double area) {
  p.n_l.assign(p.levels + 1, 0);
  p.a_l.assign(p.levels + 1, 0);
  p.p_l.assign(p.levels, 0);
  for (int l = 0; l <= p.levels; ++l) {
    p.n_l[l] = node_count / (std::pow(2.0, l) * std::pow(double(p.gamma), l));
    p.a_l[l] = area / std::pow(double(p.gamma), l);
  }
  for (int l = 0; l < p.levels; ++l) {
    p.p_l[l] = p.constants.k2 * std::pow(2.0, -l) * p.gamma;
  }
}

bool power_condition_holds(const HierarchyParams& p) {
  for (int l = 0; l < p.levels; ++l) {
    double cap = std::pow(p.a_l[l], p.alpha / 2) / p.n_l[l + 1];
    if (p.p_l[l] > cap * (1 + kCountTol)) return false;
  }
  return true;
}

}  // namespace

SchemeConstants compute_constants(double r_min, double alpha, double delta_sq,
                                  double ambient_noise) {
  if (!(r_min > 0) || !(r_min < 1)) {
    throw Error("invalid-parameter", "r_min must lie in (0,1)");
  }
  if (!(alpha > 2)) {
    throw Error("invalid-parameter", "alpha must exceed 2");
  }
  if (!(delta_sq > 0) || !(delta_sq < 1)) {
    throw Error("invalid-parameter", "delta_sq must lie in (0,1)");
  }
  SchemeConstants c;
  c.r_min = r_min;
  c.alpha = alpha;
  c.delta_sq = delta_sq;
  c.ambient_noise = ambient_noise;
  c.k1 = 4 * (1 + r_min) * (1 + r_min) / (M_PI * r_min * r_min);
  c.k2 = 1 / (2 * c.k1);
  c.k3 = 4 / c.k2;
  c.n0 = noise_plus_interference(alpha, ambient_noise);
  double gain_floor = std::pow(2.0, -1.5 * alpha);
  double competition = std::pow(2.0, alpha / 2) + c.n0 + delta_sq;
  c.k4 = 0.5 * std::log2(1 + gain_floor / competition);
  c.k5 = (1 / c.k4) *
         std::log2(1 + (std::pow(2.0, -alpha / 2) + c.n0) / delta_sq);
  c.k6 = c.k4;
  c.k7 = (1 / c.k6) * (2 + alpha / 2);
  return c;
}

HierarchyParams build_params(int n, double alpha, double delta, double r_min,
                             double delta_sq) {
  if (n < 16) throw Error("invalid-parameter", "need n >= 16");
  if (!(delta > 0) || !(delta < 0.5)) {
    throw Error("invalid-parameter", "delta must lie in (0, 1/2)");
  }
  HierarchyParams p;
  p.n = n;
  p.alpha = alpha;
  p.delta = delta;
  p.delta_sq = delta_sq;
  p.levels = level_count(n, delta);
  p.gamma = integer_root_floor(n, p.levels + 1);
  p.constants = compute_constants(r_min, alpha, delta_sq);
  fill_levels(p, p.n, p.n);
  p.power_ok = power_condition_holds(p);

  // Report the smallest dyadic n beyond which the per-level power budgets
  // stay within the node power constraint along the whole scanned range.
  double threshold = std::numeric_limits<double>::infinity();
  for (int e = 22; e >= 4; --e) {
    HierarchyParams probe;
    probe.n = 1 << e;
    probe.alpha = alpha;
    probe.delta = delta;
    probe.delta_sq = delta_sq;
    probe.levels = level_count(probe.n, delta);
    probe.gamma = integer_root_floor(probe.n, probe.levels + 1);
    probe.constants = p.constants;
    fill_levels(probe, probe.n, probe.n);
    if (power_condition_holds(probe)) {
      threshold = probe.n;
    } else {
      break;
    }
  }
  p.power_threshold_n = threshold;
  return p;
}

HierarchyParams build_params_custom(int n, double alpha, double delta,
                                    double r_min, double delta_sq, int levels,
                                    int gamma) {
  if (n < 16) throw Error("invalid-parameter", "need n >= 16");
  if (levels < 0 || gamma < 2) {
    throw Error("invalid-parameter",
                "need levels >= 0 and gamma >= 2 (levels = 0 degenerates to "
                "one TDMA round over the whole region)");
  }
  if (ipow_sat(gamma, levels) > uint64_t(n)) {
    throw Error("invalid-parameter", "gamma^levels exceeds n");
  }
  HierarchyParams p;
  p.n = n;
  p.alpha = alpha;
  p.delta = delta;
  p.delta_sq = delta_sq;
  p.levels = levels;
  p.gamma = gamma;
  p.constants = compute_constants(r_min, alpha, delta_sq);
  fill_levels(p, p.n, p.n);
  p.power_ok = power_condition_holds(p);
  p.power_threshold_n = p.power_ok ? p.n : std::numeric_limits<double>::infinity();
  return p;
}

HierarchyParams build_params_general(double node_count, double area,
                                     double alpha, double delta, double r_min,
                                     double delta_sq, double ambient_noise) {
  if (!(node_count >= 16)) {
    throw Error("below-threshold-n", "need at least 16 nodes, got " +
                                         std::to_string(node_count));
  }
  if (!(area > 0)) throw Error("invalid-parameter", "area must be positive");
  if (!(delta > 0) || !(delta < 0.5)) {
    throw Error("invalid-parameter", "delta must lie in (0, 1/2)");
  }
  HierarchyParams p;
  p.n = static_cast<int>(llround(node_count));
  p.alpha = alpha;
  p.delta = delta;
  p.delta_sq = delta_sq;
  p.levels = level_count(p.n, delta);
  p.gamma = integer_root_floor(p.n, p.levels + 1);
  p.constants = compute_constants(r_min, alpha, delta_sq, ambient_noise);
  fill_levels(p, node_count, area);
  p.power_ok = power_condition_holds(p);
  p.power_threshold_n =
      p.power_ok ? p.n : std::numeric_limits<double>::infinity();
  return p;
}

std::string params_table_csv(const HierarchyParams& params) {
  std::ostringstream out;
  out.precision(12);
  out << "level,n_l,a_l,p_l,dense_count_bound\n";
  for (int l = 0; l <= params.levels; ++l) {
    out << l << ',' << params.n_l[l] << ',' << params.a_l[l] << ',';
    if (l < params.levels) {
      double bound = params.constants.k2 * std::pow(2.0, -l) * params.gamma;
      out << params.p_l[l] << ',' << bound;
    } else {
      out << ',';
    }
    out << '\n';
  }
  return out.str();
}

DenseSquareletReport classify_squarelets(const NodePlacement& p,
                                         const HierarchyParams& params,
                                         int level) {
  if (level < 0 || level >= params.levels) {
    throw Error("level-out-of-range",
                "level " + std::to_string(level) + " with L = " +
                    std::to_string(params.levels));
  }
  double area = p.region_side * p.region_side;
  if (area > params.a_l[level] * (1 + 1e-9)) {
    throw Error("invalid-placement", "region larger than the level area");
  }
  if (p.n + kCountTol < params.n_l[level]) {
    throw Error("invalid-placement", "fewer nodes than the level requires");
  }

  DenseSquareletReport rep;
  rep.level = level;
  rep.grid = build_grid(p, grid_side_for_gamma(params.gamma));
  rep.dense.assign(rep.grid.cell_count(), 0);
  double need = params.n_l[level + 1];
  for (int i = 0; i < rep.grid.cell_count(); ++i) {
    int count = static_cast<int>(rep.grid.cell_nodes[i].size());
    rep.max_cell_count = std::max(rep.max_cell_count, count);
    if (count + kCountTol >= need) {
      rep.dense[i] = 1;
      ++rep.dense_count;
    }
  }
  rep.dense_count_bound =
      params.constants.k2 * std::pow(2.0, -level) * params.gamma;
  rep.max_count_bound = params.constants.k1 * params.a_l[level] / params.gamma;
  bool enough = rep.dense_count >= std::ceil(rep.dense_count_bound - kCountTol);
  bool not_crowded = rep.max_cell_count <= rep.max_count_bound + kCountTol;
  rep.lemma_ok = enough && not_crowded;
  return rep;
}

NodePlacement extract_cell_placement(const NodePlacement& p,
                                     const SquareletGrid& grid, int cell_idx) {
  Cell c = grid.cell(cell_idx);
  NodePlacement sub;
  sub.r_min = p.r_min;
  sub.region_side = c.side;
  sub.kind = p.kind + "-cell";
  sub.seed = p.seed;
  for (int idx : grid.cell_nodes[cell_idx]) {
    sub.nodes.push_back({p.nodes[idx].x - c.x0, p.nodes[idx].y - c.y0});
  }
  sub.n = static_cast<int>(sub.nodes.size());
  return sub;
}

}  // namespace capsim
