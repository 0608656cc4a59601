#include "capsim/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <tuple>

#include "capsim/error.hpp"
#include "capsim/rng.hpp"
#include "json.hpp"

namespace capsim {

namespace {

// Stamped into the CSV trailer so archived sweeps identify the code that
// produced them.
constexpr const char* kVersionTag = "capsim-0.1.0";

PlacementKind kind_from_name(const std::string& name) {
  if (name == "uniform") return PlacementKind::kUniformRandom;
  if (name == "lattice") return PlacementKind::kLattice;
  if (name == "two-cluster") return PlacementKind::kTwoCluster;
  if (name == "gap-cluster") return PlacementKind::kGapCluster;
  throw Error("invalid-parameter", "unknown placement kind: " + name);
}

FadingMode fading_from_name(const std::string& name) {
  if (name == "fast") return FadingMode::kFast;
  if (name == "slow") return FadingMode::kSlow;
  throw Error("invalid-parameter", "unknown fading mode: " + name);
}

/// Gap-cluster construction resolution d = side / k with k even so the gap
/// straddles the region midline; k is the even count nearest side / n^eta.
double gap_d_star_for(int n, double eta) {
  double side = std::sqrt(static_cast<double>(n));
  double target_cells = side / std::pow(static_cast<double>(n), eta);
  int64_t half = std::llround(target_cells / 2.0);
  int64_t cells = std::max<int64_t>(1, half) * 2;
  return side / static_cast<double>(cells);
}

std::string fmt(double v) {
  std::ostringstream out;
  out << std::setprecision(12) << v;
  return out.str();
}

/// Optional numeric column: negative or non-finite means "not evaluated".
std::string fmt_opt(double v) {
  if (v < 0 || !std::isfinite(v)) return "";
  return fmt(v);
}

SweepRow evaluate_row(const ExperimentConfig& cfg, int n, double alpha,
                      const std::string& placement_name,
                      const std::string& scheme,
                      const std::string& fading_name) {
  SweepRow row;
  row.n = n;
  row.alpha = alpha;
  row.delta = cfg.delta;
  row.mu = cfg.mu;
  row.placement = placement_name;
  row.scheme = scheme;
  row.fading = fading_name;
  try {
    PlacementKind kind = kind_from_name(placement_name);
    FadingMode mode = fading_from_name(fading_name);
    double gap_d = 0;
    if (kind == PlacementKind::kGapCluster) {
      gap_d = gap_d_star_for(n, cfg.gap_eta);
    }
    uint64_t kind_tag = static_cast<uint64_t>(kind);
    NodePlacement placement =
        generate_placement(kind, n, cfg.r_min,
                           derive_seed(cfg.seed, kStreamPlacement,
                                       static_cast<uint64_t>(n), kind_tag),
                           gap_d);
    TrafficMatrix traffic = random_permutation_traffic(
        n, derive_seed(cfg.seed, kStreamTraffic, static_cast<uint64_t>(n),
                       kind_tag));

    if (scheme == "HR") {
      HierarchyParams params =
          build_params(n, alpha, cfg.delta, cfg.r_min, cfg.delta_sq);
      RateReport report = tau_recursion(params, mode);
      row.rho = report.rho;
      row.tau0 = report.tau0;
      if (mode == FadingMode::kSlow && n <= cfg.monte_carlo_ceiling) {
        try {
          DenseSquareletReport dense =
              classify_squarelets(placement, params, 0);
          ScheduleDecomposition decomp =
              decompose_slow(traffic, dense, placement, params);
          int slow_trials = std::max(10, cfg.trials / 500);
          SlowFadingReport slow = slow_fading_success(
              decomp, traffic, placement, params, cfg.seed, slow_trials, 8);
          row.success_prob = slow.quarter_success;
        } catch (const Error&) {
          // The sampler needs a feasible relay decomposition; at the default
          // branching small instances put every squarelet within the
          // eligibility radius of some central pair, so no relay exists.
          // The analytic rate stands on its own and the success column
          // stays unevaluated.
          row.success_prob = -1;
        }
      }
    } else if (scheme == "CMH") {
      double d_star = placement.claimed_d_star;
      if (d_star <= 0) {
        d_star = regularity_resolution(placement, cfg.mu).d_star;
      }
      CmhReport report = cmh_rate(placement, cfg.mu, d_star, traffic, alpha,
                                  cfg.delta, cfg.delta_sq);
      row.rho = report.rate.rho;
      row.tau0 = report.rate.tau0;
      row.d_star = report.rate.d_star;
    } else if (scheme == "MH") {
      MhReport report = mh_baseline(placement, alpha, traffic);
      row.rho = report.rate.rho;
      row.tau0 = report.rate.tau0;
    } else {
      throw Error("invalid-parameter", "unknown scheme: " + scheme);
    }

    if (cfg.with_bounds && n <= cfg.bound_ceiling) {
      ConverseReport converse = converse_cut(placement, alpha, traffic);
      if (std::isfinite(converse.per_node_bound)) {
        row.bound = converse.per_node_bound;
        if (row.rho > row.bound * (1 + 1e-9)) row.sandwich_ok = false;
      }
    }
  } catch (const Error& e) {
    row.error = e.code();
    row.rho = 0;
    row.tau0 = 0;
    row.bound = -1;
    row.success_prob = -1;
  }
  return row;
}

double predicted_slope(const std::string& scheme, double alpha,
                       const std::string& placement,
                       const std::vector<const SweepRow*>& rows) {
  if (scheme == "HR") return 1.0 - alpha / 2.0;
  if (scheme == "MH") {
    if (placement == "two-cluster" || placement == "gap-cluster") {
      return -alpha / 2.0;
    }
    return -0.5;
  }
  // CMH follows d_star^{3-alpha} / sqrt(n); with d_star ~ n^eta the slope
  // is (3 - alpha) eta - 1/2. eta is read off the realized tile sides.
  double eta_sum = 0;
  int eta_count = 0;
  for (const SweepRow* row : rows) {
    if (row->d_star > 0 && row->n > 1) {
      eta_sum += std::log2(row->d_star) /
                 std::log2(static_cast<double>(row->n));
      ++eta_count;
    }
  }
  double eta = eta_count > 0 ? eta_sum / eta_count : 0.0;
  return (3.0 - alpha) * eta - 0.5;
}

}  // namespace

ExperimentConfig default_config() { return ExperimentConfig{}; }

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io-error", "cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error("invalid-parameter",
                "config parse failure: " + std::string(e.what()));
  }
  ExperimentConfig cfg;
  try {
    cfg.n_values = j.value("n_values", cfg.n_values);
    cfg.alpha_values = j.value("alpha_values", cfg.alpha_values);
    cfg.delta = j.value("delta", cfg.delta);
    cfg.mu = j.value("mu", cfg.mu);
    cfg.delta_sq = j.value("delta_sq", cfg.delta_sq);
    cfg.r_min = j.value("r_min", cfg.r_min);
    cfg.placements = j.value("placements", cfg.placements);
    cfg.schemes = j.value("schemes", cfg.schemes);
    cfg.fading = j.value("fading", cfg.fading);
    cfg.gap_eta = j.value("gap_eta", cfg.gap_eta);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.trials = j.value("trials", cfg.trials);
    cfg.analytic_ceiling = j.value("analytic_ceiling", cfg.analytic_ceiling);
    cfg.monte_carlo_ceiling =
        j.value("monte_carlo_ceiling", cfg.monte_carlo_ceiling);
    cfg.bound_ceiling = j.value("bound_ceiling", cfg.bound_ceiling);
    cfg.with_bounds = j.value("with_bounds", cfg.with_bounds);
    cfg.out_path = j.value("out_path", cfg.out_path);
  } catch (const nlohmann::json::exception& e) {
    throw Error("invalid-parameter",
                "config field type mismatch: " + std::string(e.what()));
  }
  if (cfg.n_values.empty()) {
    throw Error("invalid-parameter", "config lists no n values");
  }
  for (int n : cfg.n_values) {
    if (n < 16) throw Error("invalid-parameter", "n below threshold: 16");
    if (n > cfg.analytic_ceiling) {
      throw Error("invalid-parameter",
                  "n exceeds the analytic ceiling: " + std::to_string(n));
    }
  }
  for (double a : cfg.alpha_values) {
    if (!(a > 2.0)) {
      throw Error("invalid-parameter", "alpha must exceed 2");
    }
  }
  if (cfg.trials < 1) throw Error("invalid-parameter", "trials must be >= 1");
  return cfg;
}

std::string config_json(const ExperimentConfig& config) {
  nlohmann::json j;
  j["n_values"] = config.n_values;
  j["alpha_values"] = config.alpha_values;
  j["delta"] = config.delta;
  j["mu"] = config.mu;
  j["delta_sq"] = config.delta_sq;
  j["r_min"] = config.r_min;
  j["placements"] = config.placements;
  j["schemes"] = config.schemes;
  j["fading"] = config.fading;
  j["gap_eta"] = config.gap_eta;
  j["seed"] = config.seed;
  j["trials"] = config.trials;
  j["analytic_ceiling"] = config.analytic_ceiling;
  j["monte_carlo_ceiling"] = config.monte_carlo_ceiling;
  j["bound_ceiling"] = config.bound_ceiling;
  j["with_bounds"] = config.with_bounds;
  j["out_path"] = config.out_path;
  return j.dump(2);
}

ExponentFit fit_exponent(const std::vector<double>& log2_n,
                         const std::vector<double>& log2_rho) {
  if (log2_n.size() != log2_rho.size()) {
    throw Error("invalid-parameter", "fit input size mismatch");
  }
  size_t k = log2_n.size();
  if (k < 4) {
    throw Error("invalid-parameter", "exponent fit needs at least 4 points");
  }
  double mean_x = 0;
  double mean_y = 0;
  for (size_t i = 0; i < k; ++i) {
    mean_x += log2_n[i];
    mean_y += log2_rho[i];
  }
  mean_x /= static_cast<double>(k);
  mean_y /= static_cast<double>(k);
  double sxx = 0;
  double sxy = 0;
  for (size_t i = 0; i < k; ++i) {
    sxx += (log2_n[i] - mean_x) * (log2_n[i] - mean_x);
    sxy += (log2_n[i] - mean_x) * (log2_rho[i] - mean_y);
  }
  if (sxx <= 0) {
    throw Error("invalid-parameter", "exponent fit needs distinct n values");
  }
  ExponentFit fit;
  fit.points = static_cast<int>(k);
  fit.slope = sxy / sxx;
  double intercept = mean_y - fit.slope * mean_x;
  double rss = 0;
  for (size_t i = 0; i < k; ++i) {
    double e = log2_rho[i] - (intercept + fit.slope * log2_n[i]);
    rss += e * e;
  }
  fit.std_error = std::sqrt(rss / static_cast<double>(k - 2) / sxx);
  return fit;
}

SweepResult run_sweep(const ExperimentConfig& config) {
  SweepResult result;
  for (int n : config.n_values) {
    for (double alpha : config.alpha_values) {
      for (const std::string& placement : config.placements) {
        for (const std::string& scheme : config.schemes) {
          for (const std::string& fading : config.fading) {
            result.rows.push_back(
                evaluate_row(config, n, alpha, placement, scheme, fading));
          }
        }
      }
    }
  }
  std::sort(result.rows.begin(), result.rows.end(),
            [](const SweepRow& a, const SweepRow& b) {
              return std::tie(a.n, a.alpha, a.placement, a.scheme, a.fading) <
                     std::tie(b.n, b.alpha, b.placement, b.scheme, b.fading);
            });

  std::ostringstream csv;
  csv << "n,alpha,delta,mu,placement,scheme,fading,rho,tau0,bound,d_star,"
         "success_prob,error\n";
  for (const SweepRow& row : result.rows) {
    csv << row.n << ',' << fmt(row.alpha) << ',' << fmt(row.delta) << ','
        << fmt(row.mu) << ',' << row.placement << ',' << row.scheme << ','
        << row.fading << ',';
    if (row.error.empty()) {
      csv << fmt(row.rho) << ',' << fmt(row.tau0);
    } else {
      csv << ',';
    }
    csv << ',' << fmt_opt(row.bound) << ','
        << (row.d_star > 0 ? fmt(row.d_star) : std::string()) << ','
        << fmt_opt(row.success_prob) << ',' << row.error << '\n';
    if (row.bound >= 0 && row.error.empty()) {
      ++result.bounded_rows;
      if (!row.sandwich_ok) result.hard_ok = false;
    }
  }
  csv << "# seed=" << config.seed << '\n';
  csv << "# version=" << kVersionTag << '\n';

  // Exponent fits per (scheme, alpha, placement, fading) group with at
  // least 4 clean rows.
  std::map<std::tuple<std::string, double, std::string, std::string>,
           std::vector<const SweepRow*>>
      groups;
  for (const SweepRow& row : result.rows) {
    if (!row.error.empty() || row.rho <= 0) continue;
    groups[std::make_tuple(row.scheme, row.alpha, row.placement, row.fading)]
        .push_back(&row);
  }
  for (const auto& [key, rows] : groups) {
    if (rows.size() < 4) continue;
    std::vector<double> xs;
    std::vector<double> ys;
    double n_max = 0;
    for (const SweepRow* row : rows) {
      xs.push_back(std::log2(static_cast<double>(row->n)));
      ys.push_back(std::log2(row->rho));
      n_max = std::max(n_max, static_cast<double>(row->n));
    }
    ExponentFit fit = fit_exponent(xs, ys);
    fit.scheme = std::get<0>(key);
    fit.alpha = std::get<1>(key);
    fit.placement = std::get<2>(key);
    fit.fading = std::get<3>(key);
    fit.predicted = predicted_slope(fit.scheme, fit.alpha, fit.placement, rows);
    fit.tolerance = 0.15;
    fit.allowance = std::pow(std::log2(n_max), config.delta - 0.5);
    fit.within =
        std::fabs(fit.slope - fit.predicted) <= fit.tolerance + fit.allowance;
    result.fits.push_back(fit);
  }

  result.csv = csv.str();
  return result;
}

CompareReport compare_schemes(const std::vector<SweepRow>& rows,
                              const std::string& scheme_a,
                              const std::string& scheme_b,
                              const std::string& placement, double alpha,
                              double tolerance) {
  std::map<int, double> rho_a;
  std::map<int, double> rho_b;
  for (const SweepRow& row : rows) {
    if (row.placement != placement || row.alpha != alpha ||
        row.fading != "fast" || !row.error.empty() || row.rho <= 0) {
      continue;
    }
    if (row.scheme == scheme_a) rho_a[row.n] = row.rho;
    if (row.scheme == scheme_b) rho_b[row.n] = row.rho;
  }
  CompareReport report;
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& [n, a] : rho_a) {
    auto it = rho_b.find(n);
    if (it == rho_b.end()) continue;
    report.n_values.push_back(n);
    report.ratio.push_back(a / it->second);
    xs.push_back(std::log2(static_cast<double>(n)));
    ys.push_back(std::log2(a / it->second));
  }
  if (report.n_values.size() < 4) {
    throw Error("missing-scheme",
                "fewer than 4 shared rows for " + scheme_a + " vs " +
                    scheme_b + " on " + placement);
  }
  ExponentFit fit = fit_exponent(xs, ys);
  report.growth_exponent = fit.slope;
  report.std_error = fit.std_error;
  report.asserted = std::fabs(report.growth_exponent - 1.0) <= tolerance;
  return report;
}

PhyCheckReport phy_check(int n, double alpha, int trials, uint64_t seed) {
  if (trials < 100) {
    throw Error("invalid-parameter", "phy check needs at least 100 trials");
  }
  PhyCheckReport rep;
  rep.n = n;
  rep.trials = trials;
  HierarchyParams params = build_params(n, alpha, 0.25, 0.5, 0.5);
  rep.k4 = params.constants.k4;
  rep.k6 = params.constants.k6;
  NodePlacement placement = generate_placement(
      PlacementKind::kUniformRandom, n, 0.5,
      derive_seed(seed, kStreamPlacement, static_cast<uint64_t>(n), 99));
  DenseSquareletReport dense = classify_squarelets(placement, params, 0);

  // Relay cell: the fullest dense cell. Source / destination cells: the two
  // cells with the most nodes beyond the eligibility distance from it.
  int relay_idx = -1;
  int relay_count = -1;
  for (int c = 0; c < dense.grid.cell_count(); ++c) {
    if (!dense.dense[c]) continue;
    int count = static_cast<int>(dense.grid.cell_nodes[c].size());
    if (count > relay_count) {
      relay_count = count;
      relay_idx = c;
    }
  }
  if (relay_idx < 0) {
    throw Error("no-eligible-relay", "no dense cell in the audit instance");
  }
  Cell relay_cell = dense.grid.cell(relay_idx);
  double min_dist = std::sqrt(2.0 * params.a_l[1]);
  auto qualifying = [&](int cell_idx) {
    std::vector<int> nodes;
    for (int v : dense.grid.cell_nodes[cell_idx]) {
      if (point_to_cell_distance(placement.nodes[v], relay_cell) >=
          min_dist * (1 + 1e-9)) {
        nodes.push_back(v);
      }
    }
    return nodes;
  };
  int src_idx = -1;
  int dst_idx = -1;
  size_t src_count = 0;
  size_t dst_count = 0;
  for (int c = 0; c < dense.grid.cell_count(); ++c) {
    if (c == relay_idx) continue;
    size_t count = qualifying(c).size();
    if (count > src_count) {
      dst_idx = src_idx;
      dst_count = src_count;
      src_idx = c;
      src_count = count;
    } else if (count > dst_count) {
      dst_idx = c;
      dst_count = count;
    }
  }
  if (src_idx < 0 || dst_idx < 0 || src_count < 2 || dst_count < 2) {
    throw Error("no-eligible-relay",
                "audit instance lacks cells beyond the eligibility distance");
  }

  MacContext mac = make_mac_context(qualifying(src_idx),
                                    dense.grid.cell_nodes[relay_idx],
                                    relay_cell, placement, params, 0);
  size_t antennas = mac.relay_nodes.size();
  rep.antennas = static_cast<int>(antennas);
  // One stream per destination, at most one per antenna.
  std::vector<int> destinations = qualifying(dst_idx);
  if (destinations.size() > antennas) destinations.resize(antennas);
  BcContext bc = make_bc_context(destinations, dense.grid.cell_nodes[relay_idx],
                                 relay_cell, placement, params, 0);

  size_t sources = mac.sources.size();
  std::vector<std::vector<double>> cross_mean(
      sources, std::vector<double>(sources, 0.0));
  std::vector<std::vector<double>> cross_m2(sources,
                                            std::vector<double>(sources, 0.0));
  double mac_rate_sum = 0;
  for (int t = 0; t < trials; ++t) {
    MacTrial trial = mac_sinr_trial(mac, placement, params, seed, t);
    for (size_t i = 0; i < sources; ++i) {
      for (size_t j = i + 1; j < sources; ++j) {
        double x = trial.cross[i][j];
        double d = x - cross_mean[i][j];
        cross_mean[i][j] += d / static_cast<double>(t + 1);
        cross_m2[i][j] += d * (x - cross_mean[i][j]);
      }
      mac_rate_sum += trial.rate[i];
    }
  }
  rep.mean_mac_rate =
      mac_rate_sum / (static_cast<double>(trials) * static_cast<double>(sources));
  auto cross_z_of = [&](size_t i, size_t j) {
    double oracle = mac_cross_term_mean(mac, placement, alpha,
                                        static_cast<int>(i),
                                        static_cast<int>(j));
    double var = cross_m2[i][j] / static_cast<double>(trials - 1);
    double se = std::sqrt(var / static_cast<double>(trials));
    if (se <= 0) return 0.0;
    return std::fabs(cross_mean[i][j] - oracle) / se;
  };
  rep.cross_z = cross_z_of(0, 1);
  for (size_t i = 0; i < sources; ++i) {
    for (size_t j = i + 1; j < sources; ++j) {
      rep.max_cross_z = std::max(rep.max_cross_z, cross_z_of(i, j));
    }
  }

  std::vector<double> power_mean(antennas, 0.0);
  std::vector<double> power_m2(antennas, 0.0);
  double bc_rate_sum = 0;
  for (int t = 0; t < trials; ++t) {
    BcTrial trial = bc_beamform_trial(bc, placement, params, seed, t);
    for (size_t v = 0; v < antennas; ++v) {
      double x = trial.node_power[v];
      double d = x - power_mean[v];
      power_mean[v] += d / static_cast<double>(t + 1);
      power_m2[v] += d * (x - power_mean[v]);
    }
    for (size_t w = 0; w < bc.destinations.size(); ++w) {
      rep.min_alignment = std::min(rep.min_alignment, trial.alignment[w]);
      bc_rate_sum += trial.rate[w];
    }
  }
  rep.mean_bc_rate = bc_rate_sum / (static_cast<double>(trials) *
                                    static_cast<double>(bc.destinations.size()));
  std::vector<double> power_oracle = bc_power_mean(bc, placement, params);
  double se0 = std::sqrt(power_m2[0] / static_cast<double>(trials - 1) /
                         static_cast<double>(trials));
  rep.power_z =
      se0 > 0 ? std::fabs(power_mean[0] - power_oracle[0]) / se0 : 0.0;
  // The budget allows power_cap of signal on top of the quantizer noise.
  double cap_total = bc.power_cap + params.delta_sq;
  rep.power_cap_margin =
      se0 > 0 ? (cap_total - power_mean[0]) / se0
              : (power_mean[0] <= cap_total ? 1e9 : -1e9);

  rep.mac_floor_ok = rep.mean_mac_rate >= rep.k4 * (1 - 1e-9);
  rep.bc_floor_ok = rep.mean_bc_rate >= rep.k6 * (1 - 1e-9);
  rep.pass = rep.cross_z <= 3.0 && rep.power_z <= 3.0 &&
             rep.power_cap_margin >= -3.0 &&
             rep.min_alignment >= 0.5 - 1e-9;
  return rep;
}

}  // namespace capsim
