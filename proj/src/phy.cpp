#include "capsim/phy.hpp"

#include <algorithm>
#include <cmath>

#include "capsim/error.hpp"
#include "capsim/rng.hpp"

namespace capsim {

namespace {

constexpr double kTol = 1e-9;

double unit_uniform(std::mt19937_64& rng) {
  return double(rng() >> 11) * 0x1p-53;
}

double uniform_phase(std::mt19937_64& rng) {
  return 2 * M_PI * unit_uniform(rng);
}

/// CN(0, var): independent N(0, var/2) components, Box-Muller.
std::complex<double> complex_gaussian(std::mt19937_64& rng, double var) {
  double u1 = (double((rng() >> 11)) + 1) * 0x1p-53;
  double u2 = unit_uniform(rng);
  double mag = std::sqrt(-2 * std::log(u1)) * std::sqrt(var / 2);
  return {mag * std::cos(2 * M_PI * u2), mag * std::sin(2 * M_PI * u2)};
}

/// Nearest phase in {0, pi/2, pi, 3pi/2}; the residual error never
/// exceeds pi/4.
double quantize_phase(double theta) {
  long k = llround(theta / (M_PI / 2));
  return (k & 3) * (M_PI / 2);
}

int antenna_count(const HierarchyParams& params, int level) {
  return std::max(1, static_cast<int>(
                         std::floor(params.n_l[level + 1] + kTol)));
}

std::vector<int> pick_antennas(const std::vector<int>& cell_nodes,
                               const HierarchyParams& params, int level) {
  if (cell_nodes.empty()) {
    throw Error("schedule-violation", "relay cell has no nodes");
  }
  int want = antenna_count(params, level);
  std::vector<int> nodes = cell_nodes;
  if (static_cast<int>(nodes.size()) > want) nodes.resize(want);
  return nodes;
}

}  // namespace

InterferenceBudget interference_budget(double alpha, int cutoff) {
  if (!(alpha > 2)) {
    throw Error("divergence-warning",
                "interference ring series diverges for alpha <= 2");
  }
  if (cutoff < 1) throw Error("invalid-parameter", "cutoff must be >= 1");
  InterferenceBudget b;
  b.alpha = alpha;
  b.cutoff = cutoff;
  double scale = 8 * std::pow(2.0, alpha);
  long double sum = 0;
  for (int i = 1; i <= cutoff; ++i) {
    sum += std::pow((long double)(i), 1 - (long double)(alpha));
  }
  b.total = 1 + scale * double(sum);
  b.tail_bound = scale * std::pow(double(cutoff), 2 - alpha) / (alpha - 2);
  return b;
}

double noise_plus_interference(double alpha, double ambient, double rel_tol) {
  if (!(alpha > 2)) {
    throw Error("divergence-warning",
                "interference ring series diverges for alpha <= 2");
  }
  // Direct summation with a midpoint integral tail: the tail error decays
  // like m^-alpha, so doubling m until the estimate is stable reaches the
  // tolerance even for alpha barely above 2.
  auto estimate = [&](int m) {
    long double sum = 0;
    for (int i = 1; i <= m; ++i) {
      sum += std::pow((long double)(i), 1 - (long double)(alpha));
    }
    sum += std::pow((long double)(m) + 0.5L, 2 - (long double)(alpha)) /
           ((long double)(alpha) - 2);
    return sum;
  };
  long double prev = estimate(1024);
  for (int m = 2048; m <= (1 << 21); m *= 2) {
    long double next = estimate(m);
    if (std::abs(double(next - prev)) <= rel_tol * double(next)) {
      prev = next;
      break;
    }
    prev = next;
  }
  return ambient + 8 * std::pow(2.0, alpha) * double(prev);
}

MacContext make_mac_context(const std::vector<int>& sources,
                            const std::vector<int>& relay_cell_nodes,
                            const Cell& relay_cell,
                            const NodePlacement& placement,
                            const HierarchyParams& params, int level) {
  MacContext ctx;
  ctx.sources = sources;
  ctx.relay_nodes = pick_antennas(relay_cell_nodes, params, level);
  ctx.relay_cell = relay_cell;
  ctx.level = level;
  double alpha = params.alpha;
  double a_l = params.a_l[level];
  double min_dist = std::sqrt(2 * params.a_l[level + 1]);
  double norm = std::sqrt(2 * a_l);
  int m = static_cast<int>(ctx.relay_nodes.size());

  ctx.sandwich_ok = true;
  for (int u : sources) {
    double d = point_to_cell_distance(placement.nodes[u], relay_cell);
    if (d + kTol < min_dist) {
      throw Error("schedule-violation",
                  "source " + std::to_string(u) + " too close to the relay");
    }
    double rt = d / norm;
    if (rt > 1 + kTol) {
      throw Error("schedule-violation", "normalized distance above 1");
    }
    ctx.r_tilde.push_back(rt);
    ctx.power.push_back(std::pow(rt, alpha) * std::pow(a_l, alpha / 2) / m);
  }
  ctx.duty_cycle = params.p_l[level] * params.n_l[level + 1] *
                   std::pow(a_l, -alpha / 2);

  ctx.amp.resize(sources.size() * m);
  double lo = std::pow(2.0, -1.5 * alpha);
  double hi = std::pow(2.0, -alpha / 2);
  for (size_t i = 0; i < sources.size(); ++i) {
    for (int j = 0; j < m; ++j) {
      double r = dist(placement.nodes[sources[i]],
                      placement.nodes[ctx.relay_nodes[j]]);
      double amp = std::pow(r, -alpha / 2);
      ctx.amp[i * m + j] = amp;
      double t = amp * amp * std::pow(ctx.r_tilde[i], alpha) *
                 std::pow(a_l, alpha / 2);
      if (t < lo * (1 - 1e-6) || t > hi * (1 + 1e-6)) ctx.sandwich_ok = false;
    }
  }
  return ctx;
}

MacTrial mac_sinr_trial(const MacContext& ctx, const NodePlacement& placement,
                        const HierarchyParams& params, uint64_t seed,
                        int trial) {
  (void)placement;
  int s = static_cast<int>(ctx.sources.size());
  int m = static_cast<int>(ctx.relay_nodes.size());
  auto rng = make_rng(seed, kStreamPhase, uint64_t(trial), 1);

  std::vector<std::complex<double>> g(size_t(s) * m);
  for (int i = 0; i < s; ++i) {
    for (int j = 0; j < m; ++j) {
      double theta = uniform_phase(rng);
      g[size_t(i) * m + j] =
          std::polar(ctx.amp[size_t(i) * m + j], theta);
    }
  }

  MacTrial out;
  out.cross.assign(s, std::vector<double>(s, 0));
  std::vector<double> norm_sq(s, 0);
  for (int i = 0; i < s; ++i) {
    for (int j = 0; j < m; ++j) {
      double a = ctx.amp[size_t(i) * m + j];
      norm_sq[i] += a * a;
    }
    out.cross[i][i] = norm_sq[i];
  }
  for (int i = 0; i < s; ++i) {
    for (int k = i + 1; k < s; ++k) {
      std::complex<double> dot = 0;
      const std::complex<double>* gi = &g[size_t(i) * m];
      const std::complex<double>* gk = &g[size_t(k) * m];
      for (int j = 0; j < m; ++j) dot += std::conj(gi[j]) * gk[j];
      double c = std::norm(dot);
      out.cross[i][k] = c;
      out.cross[k][i] = c;
    }
  }

  double floor_noise = params.constants.n0 + params.delta_sq;
  out.sinr.resize(s);
  out.rate.resize(s);
  for (int i = 0; i < s; ++i) {
    double interference = 0;
    for (int k = 0; k < s; ++k) {
      if (k == i) continue;
      interference += out.cross[i][k] * ctx.power[k] / norm_sq[i];
    }
    out.sinr[i] = norm_sq[i] * ctx.power[i] / (interference + floor_noise);
    out.rate[i] = 0.5 * std::log2(1 + out.sinr[i]);
  }
  return out;
}

double mac_cross_term_mean(const MacContext& ctx,
                           const NodePlacement& placement, double alpha,
                           int u_idx, int v_idx) {
  (void)placement;
  (void)alpha;
  int m = static_cast<int>(ctx.relay_nodes.size());
  double sum = 0;
  for (int j = 0; j < m; ++j) {
    double au = ctx.amp[size_t(u_idx) * m + j];
    double av = ctx.amp[size_t(v_idx) * m + j];
    sum += au * au * av * av;
  }
  return sum;
}

BcContext make_bc_context(const std::vector<int>& destinations,
                          const std::vector<int>& relay_cell_nodes,
                          const Cell& relay_cell,
                          const NodePlacement& placement,
                          const HierarchyParams& params, int level) {
  BcContext ctx;
  ctx.destinations = destinations;
  ctx.relay_nodes = pick_antennas(relay_cell_nodes, params, level);
  ctx.relay_cell = relay_cell;
  ctx.level = level;
  double alpha = params.alpha;
  double a_l = params.a_l[level];
  int m = static_cast<int>(ctx.relay_nodes.size());
  double k_msg = std::pow(2.0, -alpha) * (1 - params.delta_sq);
  ctx.message_power = k_msg * std::pow(a_l, alpha / 2) / m;
  ctx.power_cap = std::pow(a_l, alpha / 2) / m;
  double min_dist = std::sqrt(2 * params.a_l[level + 1]);

  ctx.spread_ok = true;
  ctx.amp.resize(destinations.size() * m);
  for (size_t i = 0; i < destinations.size(); ++i) {
    const Point& w = placement.nodes[destinations[i]];
    if (point_to_cell_distance(w, relay_cell) + kTol < min_dist) {
      throw Error("schedule-violation",
                  "destination " + std::to_string(destinations[i]) +
                      " too close to the relay");
    }
    double r_min_w = 0, r_max_w = 0;
    for (int j = 0; j < m; ++j) {
      double r = dist(w, placement.nodes[ctx.relay_nodes[j]]);
      ctx.amp[i * m + j] = std::pow(r, -alpha / 2);
      r_min_w = j == 0 ? r : std::min(r_min_w, r);
      r_max_w = std::max(r_max_w, r);
    }
    if (r_max_w > 2 * r_min_w * (1 + 1e-6)) ctx.spread_ok = false;
  }
  if (!ctx.spread_ok) {
    throw Error("schedule-violation",
                "destination distance spread exceeds the factor-2 guarantee");
  }
  return ctx;
}

BcTrial bc_beamform_trial(const BcContext& ctx, const NodePlacement& placement,
                          const HierarchyParams& params, uint64_t seed,
                          int trial) {
  (void)placement;
  int w_count = static_cast<int>(ctx.destinations.size());
  int m = static_cast<int>(ctx.relay_nodes.size());
  auto rng = make_rng(seed, kStreamPhase, uint64_t(trial), 2);

  // Channel and codebook-quantized phases, destination-major.
  std::vector<double> theta(size_t(w_count) * m);
  std::vector<double> theta_hat(theta.size());
  for (size_t i = 0; i < theta.size(); ++i) {
    theta[i] = uniform_phase(rng);
    theta_hat[i] = quantize_phase(theta[i]);
  }

  std::vector<double> norm_sq(w_count, 0);
  for (int w = 0; w < w_count; ++w) {
    for (int j = 0; j < m; ++j) {
      double a = ctx.amp[size_t(w) * m + j];
      norm_sq[w] += a * a;
    }
  }

  // coef[w][w~] = h_w hhat_w~^dagger; the diagonal is the beamforming gain.
  std::vector<std::complex<double>> coef(size_t(w_count) * w_count);
  for (int w = 0; w < w_count; ++w) {
    for (int t = 0; t < w_count; ++t) {
      std::complex<double> dot = 0;
      for (int j = 0; j < m; ++j) {
        double a_w = ctx.amp[size_t(w) * m + j];
        double a_t = ctx.amp[size_t(t) * m + j];
        dot += a_w * a_t *
               std::polar(1.0, theta[size_t(w) * m + j] -
                                   theta_hat[size_t(t) * m + j]);
      }
      coef[size_t(w) * w_count + t] = dot;
    }
  }

  BcTrial out;
  out.alignment.resize(w_count);
  out.sinr.resize(w_count);
  out.rate.resize(w_count);
  for (int w = 0; w < w_count; ++w) {
    double gain = std::norm(coef[size_t(w) * w_count + w]);
    double align = gain / (norm_sq[w] * norm_sq[w]);
    if (align < 0.5 - 1e-9 || align > 1 + 1e-9) {
      throw Error("alignment-violation",
                  "codebook alignment " + std::to_string(align) +
                      " outside [cos^2(pi/4), 1]");
    }
    out.alignment[w] = align;
    double signal = gain / norm_sq[w] * ctx.message_power;
    double interference = 0;
    for (int t = 0; t < w_count; ++t) {
      if (t == w) continue;
      interference += std::norm(coef[size_t(w) * w_count + t]) / norm_sq[t] *
                      ctx.message_power;
    }
    double noise =
        params.constants.n0 + params.delta_sq * norm_sq[w];
    out.sinr[w] = signal / (interference + noise);
    out.rate[w] = 0.5 * std::log2(1 + out.sinr[w]);
  }

  // Per-relay-node transmit sample for the power audit.
  auto sym_rng = make_rng(seed, kStreamSymbol, uint64_t(trial), 2);
  std::vector<std::complex<double>> x(w_count);
  for (int w = 0; w < w_count; ++w) {
    x[w] = complex_gaussian(sym_rng, ctx.message_power);
  }
  out.node_power.resize(m);
  for (int j = 0; j < m; ++j) {
    std::complex<double> xv = complex_gaussian(sym_rng, params.delta_sq);
    for (int w = 0; w < w_count; ++w) {
      double a = ctx.amp[size_t(w) * m + j];
      double phase = -theta_hat[size_t(w) * m + j];
      xv += a * std::polar(1.0, phase) / std::sqrt(norm_sq[w]) * x[w];
    }
    out.node_power[j] = std::norm(xv);
  }
  return out;
}

std::vector<double> bc_power_mean(const BcContext& ctx,
                                  const NodePlacement& placement,
                                  const HierarchyParams& params) {
  (void)placement;
  int w_count = static_cast<int>(ctx.destinations.size());
  int m = static_cast<int>(ctx.relay_nodes.size());
  std::vector<double> norm_sq(w_count, 0);
  for (int w = 0; w < w_count; ++w) {
    for (int j = 0; j < m; ++j) {
      double a = ctx.amp[size_t(w) * m + j];
      norm_sq[w] += a * a;
    }
  }
  std::vector<double> mean(m, params.delta_sq);
  for (int j = 0; j < m; ++j) {
    for (int w = 0; w < w_count; ++w) {
      double a = ctx.amp[size_t(w) * m + j];
      mean[j] += a * a / norm_sq[w] * ctx.message_power;
    }
  }
  return mean;
}

double quantizer_cost(QuantizerPhase phase, const HierarchyParams& params,
                      int level) {
  const SchemeConstants& c = params.constants;
  if (phase == QuantizerPhase::kMac) return c.k5;
  // The region area stands in for n so that runs inside a sub-square of a
  // larger network price their bits against their own area.
  return (1 / c.k6) *
         std::log2(std::pow(2.0, level + 1) / params.delta_sq *
                   std::pow(params.a_l[0], params.alpha / 2));
}

}  // namespace capsim
