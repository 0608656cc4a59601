#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "capsim/error.hpp"

namespace capsim {

struct Point {
  double x = 0;
  double y = 0;
};

double dist(const Point& a, const Point& b);

/// Axis-aligned closed square [x0, x0+side] x [y0, y0+side].
struct Cell {
  double x0 = 0;
  double y0 = 0;
  double side = 0;
};

/// Euclidean distance from p to the closest point of the closed square
/// (0 if p lies inside).
double point_to_cell_distance(const Point& p, const Cell& cell);

enum class PlacementKind {
  kLattice,
  kUniformRandom,
  kTwoCluster,
  kGapCluster,
  kFromFile,
};

const char* placement_kind_name(PlacementKind kind);

struct NodePlacement {
  std::vector<Point> nodes;
  int n = 0;               // == nodes.size()
  double r_min = 0;        // guaranteed minimum separation
  double region_side = 0;  // nodes live in [0, region_side]^2; sqrt(n) for
                           // top-level instances
  std::string kind;
  double claimed_d_star = 0;  // construction resolution of gap clusters
                              // (0 when the generator makes no claim)
  uint64_t seed = 0;
};

/// Generator dispatch. gap_d_star is consumed only by kGapCluster and must
/// tile sqrt(n) into an even number of cells, at most sqrt(n)/2 wide.
/// Throws Error("infeasible-density") when n nodes at separation r_min
/// cannot be realized.
NodePlacement generate_placement(PlacementKind kind, int n, double r_min,
                                 uint64_t seed, double gap_d_star = 0);

/// Placement file round trip: first line "n r_min", then n lines "x y".
NodePlacement load_placement(const std::string& path);
void save_placement(const NodePlacement& p, const std::string& path);

/// Throws when coordinates leave [0, region_side]^2 or some pair is closer
/// than r_min. Complete: any violating pair lands in adjacent hash cells.
void validate_placement(const NodePlacement& p);

/// Exact minimum pairwise distance, O(n^2). Test helper for small n.
double min_pairwise_distance_exhaustive(const NodePlacement& p);

/// Packing bound from the minimum-separation disk argument: any square of
/// sidelength s holds at most 4(s+r_min)^2 / (pi r_min^2) nodes.
double packing_limit(double s, double r_min);

struct SquareletGrid {
  double region_side = 0;
  int cells_per_side = 0;
  double cell_side = 0;
  std::vector<std::vector<int>> cell_nodes;  // row-major, one list per cell

  int cell_count() const { return cells_per_side * cells_per_side; }
  Cell cell(int idx) const;
  int cell_index_of(const Point& p) const;
};

/// Nodes on a shared cell boundary go to the lower (row, column) index.
int axis_cell_index(double coord, double cell_side, int cells);

SquareletGrid build_grid(const NodePlacement& p, int cells_per_side);

/// Geometric realization of the gamma-way subdivision: smallest square grid
/// whose cells are no larger than area/gamma, i.e. ceil(sqrt(gamma)) per side.
int grid_side_for_gamma(int gamma);

struct RegularityProfile {
  double mu = 0;
  std::vector<double> resolutions_checked;
  double d_star = 0;
};

/// True iff every aligned sidelength-d tile holds >= ceil(mu d^2) nodes.
/// d must tile region_side exactly (up to float tolerance).
bool is_regular_at(const NodePlacement& p, double mu, double d);

/// Minimal dyadic resolution sqrt(n)/2^k at which the placement is
/// mu-regular. Regularity is monotone in d (coarse tiles are unions of fine
/// ones), so a binary search over k suffices.
RegularityProfile regularity_resolution(const NodePlacement& p, double mu);

}  // namespace capsim
