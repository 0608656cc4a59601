#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <tuple>
#include <vector>

#include "capsim/error.hpp"
#include "capsim/harness.hpp"
#include "doctest.h"

using namespace capsim;

namespace {

std::string temp_file(const std::string& name, const std::string& content) {
  auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path);
  out << content;
  out.close();
  return path.string();
}

}  // namespace

TEST_CASE("exponent fit recovers synthetic power laws") {
  std::vector<double> xs = {8, 10, 12, 14, 16};
  std::vector<double> ys;
  for (double x : xs) ys.push_back(-0.5 * x + 3.0);
  auto fit = fit_exponent(xs, ys);
  CHECK(fit.points == 5);
  CHECK(fit.slope == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(fit.std_error == doctest::Approx(0.0).scale(1).epsilon(1e-9));

  CHECK_THROWS_WITH_AS(fit_exponent({1, 2, 3}, {1, 2, 3}),
                       doctest::Contains("invalid-parameter"), Error);
  CHECK_THROWS_WITH_AS(fit_exponent({1, 2, 3, 4}, {1, 2, 3}),
                       doctest::Contains("invalid-parameter"), Error);
  CHECK_THROWS_WITH_AS(fit_exponent({5, 5, 5, 5}, {1, 2, 3, 4}),
                       doctest::Contains("invalid-parameter"), Error);
}

TEST_CASE("config serializes, reloads and validates") {
  ExperimentConfig cfg;
  cfg.n_values = {64, 4096};
  cfg.alpha_values = {2.5, 4.0};
  cfg.placements = {"lattice", "gap-cluster"};
  cfg.schemes = {"HR", "CMH"};
  cfg.fading = {"fast", "slow"};
  cfg.gap_eta = 0.25;
  cfg.seed = 42;
  cfg.trials = 123;
  cfg.with_bounds = false;
  auto path = temp_file("capsim_cfg.json", config_json(cfg));
  auto back = load_config(path);
  CHECK(back.n_values == cfg.n_values);
  CHECK(back.alpha_values == cfg.alpha_values);
  CHECK(back.placements == cfg.placements);
  CHECK(back.schemes == cfg.schemes);
  CHECK(back.fading == cfg.fading);
  CHECK(back.gap_eta == doctest::Approx(0.25));
  CHECK(back.seed == 42);
  CHECK(back.trials == 123);
  CHECK_FALSE(back.with_bounds);

  CHECK_THROWS_WITH_AS(load_config("/nonexistent/capsim.json"),
                       doctest::Contains("io-error"), Error);
  auto bad = temp_file("capsim_bad.json", "this is not json");
  CHECK_THROWS_WITH_AS(load_config(bad), doctest::Contains("invalid-parameter"),
                       Error);
  auto small_n = temp_file("capsim_small_n.json", "{\"n_values\": [8]}");
  CHECK_THROWS_WITH_AS(load_config(small_n),
                       doctest::Contains("invalid-parameter"), Error);
  auto bad_alpha =
      temp_file("capsim_bad_alpha.json", "{\"alpha_values\": [2.0]}");
  CHECK_THROWS_WITH_AS(load_config(bad_alpha),
                       doctest::Contains("invalid-parameter"), Error);
}

TEST_CASE("sweeps are sorted, reproducible and carry module errors per row") {
  ExperimentConfig cfg;
  cfg.n_values = {64, 256};
  cfg.alpha_values = {3.0};
  cfg.placements = {"uniform"};
  cfg.schemes = {"HR", "MH", "CMH"};
  cfg.fading = {"fast"};
  cfg.trials = 500;
  cfg.seed = 3;
  auto sweep = run_sweep(cfg);
  REQUIRE(sweep.rows.size() == 6);
  CHECK(sweep.hard_ok);
  CHECK(sweep.bounded_rows == 5);

  auto key = [](const SweepRow& r) {
    return std::tie(r.n, r.alpha, r.placement, r.scheme, r.fading);
  };
  for (size_t i = 1; i < sweep.rows.size(); ++i) {
    CHECK(key(sweep.rows[i - 1]) < key(sweep.rows[i]));
  }

  // this instance trips the inner-node threshold of the cooperative scheme
  const SweepRow* errored = nullptr;
  for (const auto& r : sweep.rows) {
    if (!r.error.empty()) {
      REQUIRE(errored == nullptr);
      errored = &r;
    } else {
      CHECK(r.rho > 0);
    }
  }
  REQUIRE(errored != nullptr);
  CHECK(errored->scheme == "CMH");
  CHECK(errored->n == 256);
  CHECK(errored->error == "below-threshold-n");
  CHECK(errored->bound == -1);

  const std::string header =
      "n,alpha,delta,mu,placement,scheme,fading,rho,tau0,bound,d_star,"
      "success_prob,error";
  CHECK(sweep.csv.substr(0, header.size()) == header);
  CHECK(sweep.csv.find("below-threshold-n") != std::string::npos);
  CHECK(sweep.csv.find("# seed=3") != std::string::npos);
  CHECK(sweep.csv.find("# version=") != std::string::npos);

  auto again = run_sweep(cfg);
  CHECK(sweep.csv == again.csv);  // byte identical for identical config+seed

  cfg.with_bounds = false;
  auto unbounded = run_sweep(cfg);
  CHECK(unbounded.bounded_rows == 0);
  for (const auto& r : unbounded.rows) CHECK(r.bound == -1);
}

TEST_CASE("scheme comparison fits the rate ratio growth") {
  std::vector<SweepRow> rows;
  for (int n : {256, 1024, 4096, 16384}) {
    SweepRow hr;
    hr.n = n;
    hr.alpha = 4.0;
    hr.placement = "two-cluster";
    hr.scheme = "HR";
    hr.fading = "fast";
    hr.rho = 1.0 / n;
    rows.push_back(hr);
    SweepRow mh = hr;
    mh.scheme = "MH";
    mh.rho = 1.0 / (double(n) * n);
    rows.push_back(mh);
  }
  auto rep = compare_schemes(rows, "HR", "MH", "two-cluster", 4.0, 0.15);
  CHECK(rep.n_values.size() == 4);
  CHECK(rep.growth_exponent == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(rep.asserted);
  CHECK(rep.ratio.front() == doctest::Approx(256.0).epsilon(1e-12));

  rows.pop_back();
  rows.pop_back();  // drop one shared n
  CHECK_THROWS_WITH_AS(
      compare_schemes(rows, "HR", "MH", "two-cluster", 4.0, 0.15),
      doctest::Contains("missing-scheme"), Error);
}

TEST_CASE("link level audit passes on a mid-sized uniform instance") {
  CHECK_THROWS_WITH_AS(phy_check(1024, 3.0, 50, 5),
                       doctest::Contains("invalid-parameter"), Error);
  auto rep = phy_check(1024, 3.0, 500, 5);
  CHECK(rep.n == 1024);
  CHECK(rep.trials == 500);
  CHECK(rep.antennas == 51);
  CHECK(rep.pass);
  CHECK(std::fabs(rep.cross_z) <= 3.0);
  CHECK(std::fabs(rep.power_z) <= 3.0);
  CHECK(rep.min_alignment >= 0.5 - 1e-9);
  CHECK(rep.mean_mac_rate >= rep.k4 * (1 - 1e-9));
  CHECK(rep.mac_floor_ok);
  CHECK(rep.bc_floor_ok);
}
