#include "capsim/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "capsim/rng.hpp"

namespace capsim {

double dist(const Point& a, const Point& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

double point_to_cell_distance(const Point& p, const Cell& cell) {
  double dx = std::max({cell.x0 - p.x, 0.0, p.x - (cell.x0 + cell.side)});
  double dy = std::max({cell.y0 - p.y, 0.0, p.y - (cell.y0 + cell.side)});
  return std::hypot(dx, dy);
}

const char* placement_kind_name(PlacementKind kind) {
  switch (kind) {
    case PlacementKind::kLattice:
      return "lattice";
    case PlacementKind::kUniformRandom:
      return "uniform-random";
    case PlacementKind::kTwoCluster:
      return "two-cluster";
    case PlacementKind::kGapCluster:
      return "gap-cluster";
    case PlacementKind::kFromFile:
      return "from-file";
  }
  return "unknown";
}

double packing_limit(double s, double r_min) {
  return 4.0 * (s + r_min) * (s + r_min) / (M_PI * r_min * r_min);
}

int axis_cell_index(double coord, double cell_side, int cells) {
  double q = coord / cell_side;
  int k = (int)std::floor(q);
  // Boundary tie: a node exactly on a cell edge belongs to the lower index.
  if (k > 0 && q == std::floor(q)) k -= 1;
  return std::clamp(k, 0, cells - 1);
}

Cell SquareletGrid::cell(int idx) const {
  int row = idx / cells_per_side;
  int col = idx % cells_per_side;
  return Cell{col * cell_side, row * cell_side, cell_side};
}

int SquareletGrid::cell_index_of(const Point& p) const {
  int col = axis_cell_index(p.x, cell_side, cells_per_side);
  int row = axis_cell_index(p.y, cell_side, cells_per_side);
  return row * cells_per_side + col;
}

SquareletGrid build_grid(const NodePlacement& p, int cells_per_side) {
  if (cells_per_side < 1) throw Error("invalid-grid", "cells_per_side < 1");
  SquareletGrid g;
  g.region_side = p.region_side;
  g.cells_per_side = cells_per_side;
  g.cell_side = p.region_side / cells_per_side;
  g.cell_nodes.assign((size_t)cells_per_side * cells_per_side, {});
  for (int i = 0; i < p.n; ++i) {
    g.cell_nodes[g.cell_index_of(p.nodes[i])].push_back(i);
  }
  return g;
}

int grid_side_for_gamma(int gamma) {
  int s = (int)std::ceil(std::sqrt((double)gamma) - 1e-9);
  return std::max(s, 1);
}

namespace {

// Uniform hash over r_min-sized buckets; any pair closer than r_min lands in
// the same or adjacent buckets, so the 3x3 scan is complete for validation.
struct SepHash {
  double cell = 0;
  int dims = 0;
  std::vector<std::vector<int>> buckets;

  SepHash(double region, double r_min) {
    cell = r_min;
    dims = std::max(1, (int)std::ceil(region / cell));
    buckets.assign((size_t)dims * dims, {});
  }
  int index(const Point& p) const {
    int cx = std::clamp((int)(p.x / cell), 0, dims - 1);
    int cy = std::clamp((int)(p.y / cell), 0, dims - 1);
    return cy * dims + cx;
  }
  void insert(const Point& p, int id) { buckets[index(p)].push_back(id); }
  void remove(const Point& p, int id) {
    auto& b = buckets[index(p)];
    b.erase(std::find(b.begin(), b.end(), id));
  }
  // Smallest distance from p to a previously inserted node within r_min
  // reach, excluding node `skip`; +inf when none is that close.
  double nearest(const Point& p, const std::vector<Point>& nodes,
                 int skip = -1) const {
    int cx = std::clamp((int)(p.x / cell), 0, dims - 1);
    int cy = std::clamp((int)(p.y / cell), 0, dims - 1);
    double best = std::numeric_limits<double>::infinity();
    for (int yy = std::max(0, cy - 1); yy <= std::min(dims - 1, cy + 1); ++yy)
      for (int xx = std::max(0, cx - 1); xx <= std::min(dims - 1, cx + 1);
           ++xx)
        for (int id : buckets[(size_t)yy * dims + xx]) {
          if (id == skip) continue;
          best = std::min(best, dist(p, nodes[id]));
        }
    return best;
  }
};

}  // namespace

void validate_placement(const NodePlacement& p) {
  if ((int)p.nodes.size() != p.n)
    throw Error("invalid-placement", "node count mismatch");
  if (!(p.r_min > 0 && p.r_min < 1))
    throw Error("invalid-placement", "r_min outside (0,1)");
  const double eps = 1e-9 * std::max(1.0, p.region_side);
  SepHash hash(p.region_side, p.r_min);
  for (int i = 0; i < p.n; ++i) {
    const Point& q = p.nodes[i];
    if (q.x < -eps || q.y < -eps || q.x > p.region_side + eps ||
        q.y > p.region_side + eps)
      throw Error("invalid-placement", "coordinate outside region");
    if (hash.nearest(q, p.nodes) < p.r_min - 1e-12)
      throw Error("invalid-placement", "pair closer than r_min");
    hash.insert(q, i);
  }
}

double min_pairwise_distance_exhaustive(const NodePlacement& p) {
  double best = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < p.nodes.size(); ++i)
    for (size_t j = i + 1; j < p.nodes.size(); ++j)
      best = std::min(best, dist(p.nodes[i], p.nodes[j]));
  return best;
}

namespace {

NodePlacement make_lattice(int n, double r_min) {
  NodePlacement p;
  p.n = n;
  p.r_min = r_min;
  p.region_side = std::sqrt((double)n);
  p.kind = placement_kind_name(PlacementKind::kLattice);
  int m = (int)std::ceil(std::sqrt((double)n) - 1e-9);
  p.nodes.reserve(n);
  // Unit-cell centers: no node ever sits on a tile boundary, so a perfect
  // square count is regular at every dyadic resolution down to d = 1.
  for (int t = 0; t < n; ++t)
    p.nodes.push_back(Point{(double)(t % m) + 0.5, (double)(t / m) + 0.5});
  return p;
}

NodePlacement make_uniform_random(int n, double r_min, uint64_t seed) {
  NodePlacement p;
  p.n = n;
  p.r_min = r_min;
  p.region_side = std::sqrt((double)n);
  p.kind = placement_kind_name(PlacementKind::kUniformRandom);
  p.seed = seed;
  if ((double)n > packing_limit(p.region_side, r_min))
    throw Error("infeasible-density",
                "packing bound excludes n nodes at this separation");
  auto rng = make_rng(seed, kStreamPlacement, (uint64_t)n);
  std::uniform_real_distribution<double> u(0.0, p.region_side);
  SepHash hash(p.region_side, r_min);
  long long attempts = 0;
  const long long cap = 10000LL * n;
  p.nodes.reserve(n);
  while ((int)p.nodes.size() < n) {
    if (++attempts > cap)
      throw Error("infeasible-density",
                  "rejection sampling exceeded the retry cap");
    Point q{u(rng), u(rng)};
    if (hash.nearest(q, p.nodes) < r_min) continue;
    hash.insert(q, (int)p.nodes.size());
    p.nodes.push_back(q);
  }
  return p;
}

struct Rect {
  double x0, x1, y0, y1;
  bool contains(const Point& p) const {
    return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1;
  }
};

// Perturbed half-unit lattice: checkerboard of the 0.5-pitch grid inside the
// rect (diagonal neighbor distance ~0.707), thinned evenly to the requested
// count, then jittered by up to 0.07 per coordinate so the worst-case
// separation stays above 1/2.
std::vector<Point> fill_cluster(const Rect& r, int want, std::mt19937_64& rng) {
  const double pitch = 0.5;
  int cols = (int)std::floor((r.x1 - r.x0) / pitch + 1e-9) + 1;
  int rows = (int)std::floor((r.y1 - r.y0) / pitch + 1e-9) + 1;
  long long total = 0;
  for (int j = 0; j < rows; ++j)
    for (int i = j % 2; i < cols; i += 2) ++total;
  if (total < want)
    throw Error("infeasible-density", "cluster rectangle too small");
  std::uniform_real_distribution<double> jitter(-0.07, 0.07);
  std::vector<Point> out;
  out.reserve(want);
  long long t = 0;
  long long kept = 0;
  for (int j = 0; j < rows && kept < want; ++j) {
    for (int i = j % 2; i < cols && kept < want; i += 2) {
      long long keep_before = t * (long long)want / total;
      long long keep_after = (t + 1) * (long long)want / total;
      ++t;
      if (keep_after == keep_before) continue;
      Point q{r.x0 + i * pitch + jitter(rng), r.y0 + j * pitch + jitter(rng)};
      q.x = std::clamp(q.x, r.x0, r.x1);
      q.y = std::clamp(q.y, r.y0, r.y1);
      out.push_back(q);
      ++kept;
    }
  }
  return out;
}

// Tile occupancy repair: move nodes from over-threshold tiles onto free
// half-unit grid spots inside deficient tiles until every aligned d-tile
// meets ceil(mu d^2). Keeps donors at or above the threshold and never
// breaks the 1/2 separation (spots are vetted against the live hash).
void repair_regularity(std::vector<Point>& nodes, double side, double d,
                       double mu, const std::vector<Rect>& rects) {
  int m = (int)std::llround(side / d);
  double d_eff = side / m;
  int need = (int)std::ceil(mu * d_eff * d_eff - 1e-9);
  std::vector<int> count((size_t)m * m, 0);
  auto tile_of = [&](const Point& p) {
    return axis_cell_index(p.y, d_eff, m) * m + axis_cell_index(p.x, d_eff, m);
  };
  for (const Point& p : nodes) count[tile_of(p)]++;

  SepHash hash(side, 0.5);
  for (size_t i = 0; i < nodes.size(); ++i) hash.insert(nodes[i], (int)i);

  std::vector<int> donors;  // node ids in surplus tiles, consumed from back
  auto refill_donors = [&]() {
    donors.clear();
    for (size_t i = 0; i < nodes.size(); ++i)
      if (count[tile_of(nodes[i])] > need) donors.push_back((int)i);
  };
  refill_donors();

  for (int ty = 0; ty < m; ++ty) {
    for (int tx = 0; tx < m; ++tx) {
      int idx = ty * m + tx;
      while (count[idx] < need) {
        // Free spot on the absolute half-unit grid inside this tile and a
        // cluster rectangle, at least 1/2 from every current node.
        Point spot{-1, -1};
        double x_lo = tx * d_eff, x_hi = (tx + 1) * d_eff;
        double y_lo = ty * d_eff, y_hi = (ty + 1) * d_eff;
        for (int gy = (int)std::ceil(y_lo / 0.5 - 1e-9);
             gy * 0.5 <= y_hi + 1e-9 && spot.x < 0; ++gy) {
          for (int gx = (int)std::ceil(x_lo / 0.5 - 1e-9);
               gx * 0.5 <= x_hi + 1e-9; ++gx) {
            Point q{gx * 0.5, gy * 0.5};
            bool inside = false;
            for (const Rect& r : rects) inside = inside || r.contains(q);
            if (!inside) continue;
            if (tile_of(q) != idx) continue;
            if (hash.nearest(q, nodes) < 0.5) continue;
            spot = q;
            break;
          }
        }
        if (spot.x < 0)
          throw Error("infeasible-density",
                      "regularity repair found no free spot");
        int donor = -1;
        while (!donors.empty()) {
          int cand = donors.back();
          donors.pop_back();
          if (count[tile_of(nodes[cand])] > need) {
            donor = cand;
            break;
          }
        }
        if (donor < 0) {
          refill_donors();
          if (donors.empty())
            throw Error("infeasible-density",
                        "regularity repair ran out of donor nodes");
          continue;
        }
        count[tile_of(nodes[donor])]--;
        hash.remove(nodes[donor], donor);
        nodes[donor] = spot;
        hash.insert(nodes[donor], donor);
        count[idx]++;
      }
    }
  }
}

NodePlacement make_gap_cluster(int n, double d_star, uint64_t seed,
                               bool two_cluster) {
  if (n % 2 != 0)
    throw Error("infeasible-density", "cluster placements need even n");
  NodePlacement p;
  p.n = n;
  p.r_min = 0.5;
  p.region_side = std::sqrt((double)n);
  p.kind = placement_kind_name(two_cluster ? PlacementKind::kTwoCluster
                                           : PlacementKind::kGapCluster);
  p.seed = seed;
  double side = p.region_side;
  if (two_cluster) d_star = side / 2;
  double cells = side / d_star;
  // An even cell count keeps the midline on a tile boundary, so the empty
  // strip never straddles a tile.
  if (!(d_star > 0) || std::abs(cells - std::llround(cells)) > 1e-9 ||
      std::llround(cells) < 2 || std::llround(cells) % 2 != 0)
    throw Error("infeasible-density",
                "gap resolution must tile sqrt(n) into an even cell count");
  if (d_star > side / 2 + 1e-9)
    throw Error("infeasible-density", "gap resolution exceeds sqrt(n)/2");
  p.claimed_d_star = d_star;

  Rect left{0.0, (side - d_star) / 2, 0.0, side};
  Rect right{side / 2, side, 0.0, side};
  auto rng = make_rng(seed, kStreamPlacement, (uint64_t)n,
                      (uint64_t)std::llround(d_star * 1024));
  std::vector<Point> nodes = fill_cluster(left, n / 2, rng);
  std::vector<Point> rnodes = fill_cluster(right, n / 2, rng);
  nodes.insert(nodes.end(), rnodes.begin(), rnodes.end());
  repair_regularity(nodes, side, d_star, 0.5, {left, right});
  p.nodes = std::move(nodes);
  validate_placement(p);
  return p;
}

}  // namespace

NodePlacement generate_placement(PlacementKind kind, int n, double r_min,
                                 uint64_t seed, double gap_d_star) {
  if (n < 4) throw Error("infeasible-density", "n < 4");
  if (!(r_min > 0 && r_min < 1))
    throw Error("infeasible-density", "r_min outside (0,1)");
  switch (kind) {
    case PlacementKind::kLattice:
      return make_lattice(n, r_min);
    case PlacementKind::kUniformRandom:
      return make_uniform_random(n, r_min, seed);
    case PlacementKind::kTwoCluster:
      return make_gap_cluster(n, 0, seed, true);
    case PlacementKind::kGapCluster:
      return make_gap_cluster(n, gap_d_star, seed, false);
    case PlacementKind::kFromFile:
      throw Error("parse-error", "from-file placements load via load_placement");
  }
  throw Error("parse-error", "unknown placement kind");
}

NodePlacement load_placement(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("parse-error", "cannot open " + path);
  NodePlacement p;
  std::string line;
  if (!std::getline(in, line))
    throw Error("parse-error", "empty placement file");
  {
    std::istringstream head(line);
    if (!(head >> p.n >> p.r_min) || p.n < 1)
      throw Error("parse-error", "bad header line");
  }
  p.region_side = std::sqrt((double)p.n);
  p.kind = placement_kind_name(PlacementKind::kFromFile);
  p.nodes.reserve(p.n);
  for (int i = 0; i < p.n; ++i) {
    if (!std::getline(in, line))
      throw Error("parse-error", "fewer coordinate lines than n");
    std::istringstream row(line);
    Point q;
    if (!(row >> q.x >> q.y))
      throw Error("parse-error", "bad coordinate line");
    p.nodes.push_back(q);
  }
  validate_placement(p);
  return p;
}

void save_placement(const NodePlacement& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("parse-error", "cannot write " + path);
  out.precision(17);
  out << p.n << " " << p.r_min << "\n";
  for (const Point& q : p.nodes) out << q.x << " " << q.y << "\n";
}

bool is_regular_at(const NodePlacement& p, double mu, double d) {
  int m = (int)std::llround(p.region_side / d);
  if (m < 1 || std::abs(m * d - p.region_side) > 1e-6 * p.region_side)
    throw Error("invalid-resolution", "d does not tile the region");
  double d_eff = p.region_side / m;
  int need = (int)std::ceil(mu * d_eff * d_eff - 1e-9);
  std::vector<int> count((size_t)m * m, 0);
  for (const Point& q : p.nodes)
    count[(size_t)axis_cell_index(q.y, d_eff, m) * m +
          axis_cell_index(q.x, d_eff, m)]++;
  return std::all_of(count.begin(), count.end(),
                     [&](int c) { return c >= need; });
}

RegularityProfile regularity_resolution(const NodePlacement& p, double mu) {
  if (!(mu > 0 && mu <= 1)) throw Error("invalid-resolution", "mu outside (0,1]");
  RegularityProfile prof;
  prof.mu = mu;
  int kmax = (int)std::floor(std::log2(p.region_side) + 1e-9);
  for (int k = 0; k <= kmax; ++k)
    prof.resolutions_checked.push_back(p.region_side / (double)(1 << k));
  // Regular at k implies regular at every coarser k' < k, so binary-search
  // the largest regular k. k = 0 (the full square) is always regular.
  int lo = 0, hi = kmax;
  while (lo < hi) {
    int mid = (lo + hi + 1) / 2;
    if (is_regular_at(p, mu, prof.resolutions_checked[mid]))
      lo = mid;
    else
      hi = mid - 1;
  }
  prof.d_star = prof.resolutions_checked[lo];
  return prof;
}

}  // namespace capsim
