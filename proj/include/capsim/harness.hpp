#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "capsim/bounds.hpp"
#include "capsim/rates.hpp"

namespace capsim {

/// One experiment grid. Every value is serializable to and from the JSON
/// config file consumed by the command line driver.
struct ExperimentConfig {
  std::vector<int> n_values = {1024, 2048, 4096, 8192};
  std::vector<double> alpha_values = {3.0};
  double delta = 0.25;
  double mu = 0.5;
  double delta_sq = 0.5;
  double r_min = 0.5;
  std::vector<std::string> placements = {"uniform"};
  std::vector<std::string> schemes = {"HR", "MH"};
  std::vector<std::string> fading = {"fast"};
  double gap_eta = 0.5;  // gap-cluster resolution exponent: d* ~ n^eta
  uint64_t seed = 1;
  int trials = 10000;
  int analytic_ceiling = 1 << 20;     // recursion-only paths
  int monte_carlo_ceiling = 1 << 12;  // phase-draw paths
  int bound_ceiling = 1 << 13;        // exact cut sums are O(n^2)
  bool with_bounds = true;
  std::string out_path;
};

ExperimentConfig default_config();
ExperimentConfig load_config(const std::string& path);
std::string config_json(const ExperimentConfig& config);

/// One CSV row of a sweep. Negative bound / success_prob mean "not
/// evaluated" and serialize as empty fields.
struct SweepRow {
  int n = 0;
  double alpha = 0;
  double delta = 0;
  double mu = 0;
  std::string placement;
  std::string scheme;
  std::string fading;
  double rho = 0;
  double tau0 = 0;
  double bound = -1;
  double d_star = 0;
  double success_prob = -1;
  std::string error;
  bool sandwich_ok = true;  // rho <= bound whenever both are present
};

/// Least-squares slope of log2(rho) against log2(n) for one
/// (scheme, alpha, placement, fading) group.
struct ExponentFit {
  std::string scheme;
  double alpha = 0;
  std::string placement;
  std::string fading;
  int points = 0;
  double slope = 0;
  double std_error = 0;
  double predicted = 0;  // 1-alpha/2, -1/2, -alpha/2 or (3-alpha)eta - 1/2
  double tolerance = 0;
  double allowance = 0;  // log2(n_max)^{delta - 1/2}, the loss-term slack
  bool within = false;
};

/// Plain least-squares fit; throws Error("invalid-parameter") under 4
/// points. Only slope, std_error and points are filled.
ExponentFit fit_exponent(const std::vector<double>& log2_n,
                         const std::vector<double>& log2_rho);

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<ExponentFit> fits;
  std::string csv;
  int bounded_rows = 0;  // rows carrying a cut-set bound
  bool hard_ok = true;   // every bounded row satisfied the sandwich
};

/// Runs the whole grid. Per-row module errors land in the row's error
/// column and never abort the sweep; rows are emitted sorted by
/// (n, alpha, placement, scheme, fading) and the CSV is byte-identical for
/// identical (config, seed).
SweepResult run_sweep(const ExperimentConfig& config);

/// Rate ratio of two schemes on a shared placement kind, with the fitted
/// growth exponent of the ratio. Throws Error("missing-scheme") when
/// either scheme contributes fewer than 4 usable rows.
struct CompareReport {
  std::vector<int> n_values;
  std::vector<double> ratio;  // rho_a / rho_b per n
  double growth_exponent = 0;
  double std_error = 0;
  bool asserted = false;  // growth within 1 +- tolerance (alpha > 3 claim)
};

CompareReport compare_schemes(const std::vector<SweepRow>& rows,
                              const std::string& scheme_a,
                              const std::string& scheme_b,
                              const std::string& placement, double alpha,
                              double tolerance);

/// Statistical link-level audit on one instance: matched-filter cross
/// terms against the geometric oracle, broadcast power sample means
/// against the budget, codebook alignment as a hard floor on every draw.
struct PhyCheckReport {
  int n = 0;
  int antennas = 0;
  int trials = 0;
  double cross_z = 0;  // |sample mean - oracle| / standard error, lead pair
  double max_cross_z = 0;        // worst pair of the column
  double power_z = 0;            // lead relay node against the power oracle
  double power_cap_margin = 0;   // cap - sample mean, in standard errors
  double min_alignment = 1;      // over every destination and draw
  double mean_mac_rate = 0;
  double mean_bc_rate = 0;
  double k4 = 0;
  double k6 = 0;
  bool mac_floor_ok = false;  // mean mac rate at least k4
  bool bc_floor_ok = false;   // mean bc rate at least k6 (reported choice)
  bool pass = false;  // lead statistics within 3 sigma and alignment hard
};

PhyCheckReport phy_check(int n, double alpha, int trials, uint64_t seed);

}  // namespace capsim
