#pragma once

namespace capsim {

/// Partial sum of the spatial re-use interference series: unit receiver
/// noise plus 8i squares of interferers per ring i, each at distance at
/// least i times the cell side, power amplified by the 2^alpha near-edge
/// factor.
struct InterferenceBudget {
  double alpha = 0;
  int cutoff = 0;
  double total = 0;       // 1 + sum_{i=1..cutoff} 8 i 2^alpha i^-alpha
  double tail_bound = 0;  // 8 2^alpha integral_{cutoff}^inf x^{1-alpha} dx
};

/// Throws Error("divergence-warning") when alpha <= 2 (the ring series has
/// no finite limit there).
InterferenceBudget interference_budget(double alpha, int cutoff);

/// Limit of the budget series: ambient + 8 2^alpha zeta(alpha-1). Summed
/// directly with a midpoint integral tail so the requested relative
/// tolerance is reached even for alpha close to 2.
double noise_plus_interference(double alpha, double ambient = 1.0,
                               double rel_tol = 1e-10);

}  // namespace capsim
