#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "capsim/bounds.hpp"
#include "capsim/error.hpp"
#include "capsim/harness.hpp"
#include "capsim/rng.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  uint64_t seed = 0;
  bool seed_set = false;
  std::string out_path;
  int trials = 0;
};

capsim::ExperimentConfig resolve_config(const CommonFlags& flags) {
  capsim::ExperimentConfig cfg = flags.config_path.empty()
                                     ? capsim::default_config()
                                     : capsim::load_config(flags.config_path);
  if (flags.seed_set) cfg.seed = flags.seed;
  if (!flags.out_path.empty()) cfg.out_path = flags.out_path;
  if (flags.trials > 0) cfg.trials = flags.trials;
  return cfg;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw capsim::Error("io-error", "cannot write " + path);
  out << text;
}

void print_fits(const capsim::SweepResult& result) {
  for (const capsim::ExponentFit& fit : result.fits) {
    std::cout << "fit " << fit.scheme << " alpha=" << fit.alpha << " "
              << fit.placement << "/" << fit.fading << ": slope=" << std::fixed
              << std::setprecision(4) << fit.slope << " +- " << fit.std_error
              << " predicted=" << fit.predicted << " (tol " << fit.tolerance
              << " + loss " << fit.allowance << ") "
              << (fit.within ? "within" : "OUTSIDE") << "\n";
    std::cout.unsetf(std::ios::fixed);
  }
}

int run_sweep_command(const CommonFlags& flags) {
  capsim::ExperimentConfig cfg = resolve_config(flags);
  capsim::SweepResult result = capsim::run_sweep(cfg);
  if (!cfg.out_path.empty()) {
    write_text(cfg.out_path, result.csv);
    std::cout << result.rows.size() << " rows -> " << cfg.out_path << "\n";
  } else {
    std::cout << result.csv;
  }
  print_fits(result);
  int errored = 0;
  for (const capsim::SweepRow& row : result.rows) {
    if (!row.error.empty()) ++errored;
  }
  std::cout << "rows=" << result.rows.size() << " errored=" << errored
            << " bounded=" << result.bounded_rows
            << " sandwich=" << (result.hard_ok ? "ok" : "VIOLATED") << "\n";
  return result.hard_ok ? 0 : 1;
}

int run_bound_command(const CommonFlags& flags, int n, double alpha,
                      const std::string& placement_name, double d_star) {
  capsim::ExperimentConfig cfg = resolve_config(flags);
  capsim::PlacementKind kind = capsim::PlacementKind::kUniformRandom;
  if (placement_name == "lattice") kind = capsim::PlacementKind::kLattice;
  else if (placement_name == "two-cluster") kind = capsim::PlacementKind::kTwoCluster;
  else if (placement_name == "gap-cluster") kind = capsim::PlacementKind::kGapCluster;
  else if (placement_name != "uniform") {
    throw capsim::Error("invalid-parameter",
                        "unknown placement kind: " + placement_name);
  }
  double gap_d = 0;
  if (kind == capsim::PlacementKind::kGapCluster) {
    double side = std::sqrt(static_cast<double>(n));
    gap_d = d_star > 0 ? d_star : side / 4.0;
  }
  capsim::NodePlacement placement = capsim::generate_placement(
      kind, n, cfg.r_min,
      capsim::derive_seed(cfg.seed, capsim::kStreamPlacement,
                          static_cast<uint64_t>(n),
                          static_cast<uint64_t>(kind)),
      gap_d);
  capsim::TrafficMatrix traffic = capsim::random_permutation_traffic(
      n, capsim::derive_seed(cfg.seed, capsim::kStreamTraffic,
                             static_cast<uint64_t>(n),
                             static_cast<uint64_t>(kind)));
  capsim::ConverseReport report =
      capsim::converse_cut(placement, alpha, traffic);
  std::cout << "cut x=" << report.cut.line_x << " left=" << report.cut.left.size()
            << " right=" << report.cut.right.size() << "\n"
            << "bound l->r=" << report.left_to_right.bound
            << " (crossing " << report.crossing_lr << ")"
            << " r->l=" << report.right_to_left.bound << " (crossing "
            << report.crossing_rl << ")\n"
            << "per-node bound=" << report.per_node_bound
            << " helpers=" << report.helpers_added
            << " unit-density=" << (report.unit_density_ok ? "ok" : "high")
            << " theorem-regime=" << (report.theorem_regime ? "yes" : "no")
            << "\n";
  if (kind == capsim::PlacementKind::kTwoCluster ||
      kind == capsim::PlacementKind::kGapCluster) {
    capsim::GapBoundReport gap =
        capsim::adversarial_gap_bound(placement, alpha, d_star);
    std::cout << "gap cut bound=" << gap.cut_bound.bound
              << " per-node=" << gap.per_node_bound
              << " predicted-shape=" << gap.predicted_shape
              << " realized-gap=" << gap.realized_gap << "\n";
  }
  return 0;
}

int run_phy_check_command(const CommonFlags& flags, int n, double alpha) {
  capsim::ExperimentConfig cfg = resolve_config(flags);
  int trials = flags.trials > 0 ? flags.trials : cfg.trials;
  capsim::PhyCheckReport rep = capsim::phy_check(n, alpha, trials, cfg.seed);
  std::cout << "n=" << rep.n << " antennas=" << rep.antennas
            << " trials=" << rep.trials << "\n"
            << "cross z=" << rep.cross_z << " (max over pairs "
            << rep.max_cross_z << ")\n"
            << "power z=" << rep.power_z
            << " cap margin=" << rep.power_cap_margin << " se\n"
            << "min alignment=" << rep.min_alignment << "\n"
            << "mean mac rate=" << rep.mean_mac_rate << " (floor " << rep.k4
            << ", " << (rep.mac_floor_ok ? "ok" : "below") << ")\n"
            << "mean bc rate=" << rep.mean_bc_rate << " (floor " << rep.k6
            << ", " << (rep.bc_floor_ok ? "ok" : "below") << ")\n"
            << (rep.pass ? "PASS" : "FAIL") << "\n";
  return rep.pass ? 0 : 1;
}

int run_regress_command(const CommonFlags& flags) {
  capsim::ExperimentConfig cfg = resolve_config(flags);
  if (flags.config_path.empty()) {
    // Small fixed grid keeps the determinism regression fast.
    cfg.n_values = {64, 256, 1024};
    cfg.placements = {"uniform", "two-cluster"};
    cfg.schemes = {"HR", "MH"};
  }
  capsim::SweepResult first = capsim::run_sweep(cfg);
  capsim::SweepResult second = capsim::run_sweep(cfg);
  bool identical = first.csv == second.csv;
  std::cout << "rows=" << first.rows.size()
            << " rerun=" << (identical ? "identical" : "DIVERGED")
            << " sandwich=" << (first.hard_ok ? "ok" : "VIOLATED") << "\n";
  if (!cfg.out_path.empty()) write_text(cfg.out_path, first.csv);
  return identical && first.hard_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rate scaling simulator for arbitrarily placed wireless nodes"};
  app.require_subcommand(1);

  CommonFlags flags;
  int n = 1024;
  double alpha = 3.0;
  std::string placement = "uniform";
  double d_star = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", flags.config_path, "JSON experiment config");
    cmd->add_option("--seed", flags.seed, "base seed override")
        ->each([&](const std::string&) { flags.seed_set = true; });
    cmd->add_option("--out", flags.out_path, "output path override");
    cmd->add_option("--trials", flags.trials, "Monte Carlo trials override");
  };

  CLI::App* sweep = app.add_subcommand("sweep", "run the experiment grid");
  add_common(sweep);

  CLI::App* bound = app.add_subcommand("bound", "cut-set bound of one instance");
  add_common(bound);
  bound->add_option("--n", n, "node count");
  bound->add_option("--alpha", alpha, "path loss exponent");
  bound->add_option("--placement", placement, "placement kind");
  bound->add_option("--d-star", d_star, "gap resolution (cluster kinds)");

  CLI::App* phy = app.add_subcommand("phy-check", "link-level statistics audit");
  add_common(phy);
  phy->add_option("--n", n, "node count");
  phy->add_option("--alpha", alpha, "path loss exponent");

  CLI::App* regress =
      app.add_subcommand("regress", "determinism regression of the sweep");
  add_common(regress);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sweep->parsed()) return run_sweep_command(flags);
    if (bound->parsed()) return run_bound_command(flags, n, alpha, placement, d_star);
    if (phy->parsed()) return run_phy_check_command(flags, n, alpha);
    if (regress->parsed()) return run_regress_command(flags);
  } catch (const capsim::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
