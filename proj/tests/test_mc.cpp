#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fpd/channel.hpp"
#include "fpd/math.hpp"
#include "fpd/mc.hpp"
#include "fpd/multipath.hpp"
#include "fpd/path.hpp"
#include "fpd/types.hpp"

using namespace fpd;

namespace {

ChannelParams sf_params() {
  ChannelParams p;
  p.k_db = 0.0;
  p.n_pl = 4.2;
  p.sigma_sh_sq = 8.41;
  p.beta_sh = 12.92;
  p.gamma_th = -110.0;
  return p;
}

StraightGeometry toward_operator() {
  StraightGeometry g;
  g.d_src = 550.0;
  g.theta_src = 0.0;
  return g;
}

}  // namespace

TEST_CASE("joint draws reproduce the spatial covariance") {
  ChannelParams p = sf_params();
  DiscretizedPath path = make_straight_path(toward_operator(), 10.0, 1.0);
  const int reps = 10000;
  const std::size_t n = path.points.size();

  std::vector<double> acc0(n, 0.0);
  for (int r = 0; r < reps; ++r) {
    const std::vector<double> w =
        sample_shadowing(path, p, 42000 + static_cast<std::uint64_t>(r));
    for (std::size_t k = 0; k < n; ++k) acc0[k] += w[0] * w[k];
  }
  for (std::size_t k = 0; k < n; ++k) {
    const double want = shadowing_cov(p, static_cast<double>(k));
    const double rho = want / p.sigma_sh_sq;
    const double se =
        p.sigma_sh_sq * std::sqrt((1.0 + rho * rho) / double(reps));
    CHECK(std::abs(acc0[k] / reps - want) < 3.5 * se);
  }
}

TEST_CASE("draws are seed-deterministic and seed-sensitive") {
  ChannelParams p = sf_params();
  DiscretizedPath path = make_straight_path(toward_operator(), 5.0, 0.5);
  const std::vector<double> a = sample_shadowing(path, p, 7);
  const std::vector<double> b = sample_shadowing(path, p, 7);
  const std::vector<double> c = sample_shadowing(path, p, 8);
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("coincident path points are rejected") {
  ChannelParams p = sf_params();
  DiscretizedPath path = make_straight_path(toward_operator(), 5.0, 0.5);
  path.points[3] = path.points[2];  // break the geometry on purpose
  CHECK_THROWS_AS(sample_shadowing(path, p, 1), std::invalid_argument);
}

TEST_CASE("fading power draws have unit mean") {
  for (double k : {0.0, 1.59, 10.0}) {
    const std::vector<double> db = sample_multipath_db(k, 1000000, 90210);
    double mean_z = 0.0, mean_z2 = 0.0;
    for (double x : db) {
      const double z = std::pow(10.0, x / 10.0);
      mean_z += z;
      mean_z2 += z * z;
    }
    mean_z /= double(db.size());
    mean_z2 /= double(db.size());
    const double se =
        std::sqrt((mean_z2 - mean_z * mean_z) / double(db.size()));
    CHECK(std::abs(mean_z - 1.0) < 3.5 * se);
  }
  CHECK_THROWS_AS(sample_multipath_db(-0.1, 10, 1), std::invalid_argument);
}

TEST_CASE("trivially connected and trivially censored extremes") {
  ChannelParams p = sf_params();
  DiscretizedPath path = make_straight_path(toward_operator(), 5.0, 0.5);
  McConfig cfg;
  cfg.trials = 500;
  cfg.seed = 11;
  cfg.horizon_steps = 8;
  cfg.conditioning = Conditioning::none;

  // power dozens of deviations above the threshold: every trial connects
  // at the very first step
  ChannelParams hi = p;
  hi.k_db = 150.0;
  const EmpiricalFpd up = empirical_fpd(path, hi, cfg);
  CHECK(up.total == cfg.trials);
  CHECK(up.censored_count == 0);
  for (int s : up.crossing_steps) CHECK(s == 1);
  CHECK(up.cdf_at(path.delta_d) == doctest::Approx(1.0));

  // power dozens of deviations below: nobody ever connects
  ChannelParams lo = p;
  lo.k_db = -150.0;
  const EmpiricalFpd down = empirical_fpd(path, lo, cfg);
  CHECK(down.censored_count == cfg.trials);
  CHECK(down.crossing_distances.empty());
  CHECK(down.cdf_at(100.0) == 0.0);
}

TEST_CASE("retained trials do not depend on the batch size") {
  ChannelParams p = sf_params();
  DiscretizedPath path = make_straight_path(toward_operator(), 4.0, 0.1);
  McConfig cfg;
  cfg.trials = 300;
  cfg.seed = 314;
  cfg.horizon_steps = 30;
  cfg.conditioning = Conditioning::below_threshold;

  cfg.batch = 7;
  const EmpiricalFpd a = empirical_fpd(path, p, cfg);
  cfg.batch = 256;
  const EmpiricalFpd b = empirical_fpd(path, p, cfg);
  CHECK(a.crossing_steps == b.crossing_steps);
  CHECK(a.crossing_distances == b.crossing_distances);
}

TEST_CASE("pinned start reproduces the one-step crossing probability") {
  ChannelParams p = sf_params();
  DiscretizedPath path = make_straight_path(toward_operator(), 4.0, 0.03);
  const PathLossTable t = path_loss_along_path(p, path);

  McConfig cfg;
  cfg.trials = 10000;
  cfg.seed = 2024;
  cfg.horizon_steps = 5;
  cfg.conditioning = Conditioning::fixed_start;
  cfg.gamma0 = p.gamma_th - 0.1;
  cfg.record_start_values = true;

  const EmpiricalFpd emp = empirical_fpd(path, p, cfg);
  REQUIRE(emp.start_values.size() == cfg.trials);
  for (double v : emp.start_values) CHECK(v == doctest::Approx(cfg.gamma0));

  const double omega0 = cfg.gamma0 - t.value[0];
  const double rho = std::exp(-path.delta_d / p.beta_sh);
  const double s_step =
      p.sigma_sh() * std::sqrt(-std::expm1(-2.0 * path.delta_d / p.beta_sh));
  const double mu1 = t.value[1] + rho * omega0;
  const double want = 1.0 - normal_cdf((p.gamma_th - mu1) / s_step);
  double got = 0.0;
  for (int s : emp.crossing_steps) got += (s == 1) ? 1.0 : 0.0;
  got /= double(cfg.trials);
  const double se = std::sqrt(want * (1.0 - want) / double(cfg.trials));
  CHECK(std::abs(got - want) < 3.5 * se);
}

TEST_CASE("cdf-distance metric on synthetic samples") {
  // hand-built empirical sample against a hand-built step law
  FirstPassagePmf law;
  law.distances = {1.0, 2.0, 3.0, 4.0};
  law.pmf = {0.25, 0.25, 0.25, 0.25};
  law.residual = 0.0;

  EmpiricalFpd emp;
  emp.delta_d = 1.0;
  emp.crossing_distances = {1.0, 2.0, 3.0, 4.0};
  emp.total = 4;
  CHECK(ks_distance(emp, law) == doctest::Approx(0.0));

  // sample entirely past the law's support: the gap reaches one
  EmpiricalFpd late;
  late.delta_d = 1.0;
  late.crossing_distances = {10.0, 11.0, 12.0};
  late.total = 3;
  CHECK(ks_distance(late, law) == doctest::Approx(1.0));

  // large i.i.d. resample of the law stays within the one-sample band
  NormalStream rng(555);
  std::vector<double> draws;
  draws.reserve(100000);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    draws.push_back(1.0 + std::floor(u * 4.0));
  }
  std::sort(draws.begin(), draws.end());
  EmpiricalFpd big;
  big.delta_d = 1.0;
  big.crossing_distances = std::move(draws);
  big.total = 100000;
  CHECK(ks_distance(big, law) < 1.95 / std::sqrt(100000.0));
}

TEST_CASE("exact and first-order samplers agree in law on a line") {
  // On a straight path the correlation depends only on the index gap, so
  // the autoregressive construction has exactly the joint law of the full
  // factorization; a two-sample comparison at alpha = 0.001 must pass.
  ChannelParams p = sf_params();
  DiscretizedPath path = make_straight_path(toward_operator(), 31.0, 0.03);
  McConfig cfg;
  cfg.trials = 50000;
  cfg.seed = 1;
  cfg.horizon_steps = 1000;
  cfg.conditioning = Conditioning::below_threshold;

  const EmpiricalFpd exact = empirical_fpd(path, p, cfg);
  cfg.seed = 2;
  const EmpiricalFpd ar1 = empirical_fpd_ar1(path, p, cfg);
  const double gate = 1.9495 * std::sqrt(2.0 / 50000.0);
  CHECK(ks_two_sample(exact, ar1) < gate);
}

TEST_CASE("trials follow the discrete-node crossing law") {
  // The chain solver evaluates exactly the law the trials sample: power
  // checked at the same nodes, same start conditioning. The comparison is
  // limited only by sampling noise and the chain's grid resolution.
  ChannelParams p = sf_params();
  const double eps = 0.1;
  DiscretizedPath path = make_straight_path(toward_operator(), 31.0, 0.03);
  McConfig cfg;
  cfg.trials = 20000;
  cfg.seed = 99;
  cfg.horizon_steps = 1000;
  cfg.conditioning = Conditioning::below_threshold_minus_eps;
  cfg.eps = eps;
  const EmpiricalFpd emp = empirical_fpd(path, p, cfg);

  std::vector<double> gpl = path_loss_along_path(p, path).value;
  gpl.resize(static_cast<std::size_t>(cfg.horizon_steps) + 1);
  gpl[0] += eps;  // same margin conditioning as the trials
  const GammaGrid grid = make_gamma_grid(p.sigma_sh());
  const SurvivalSequence s =
      survival_probability(p, MultipathCdf::step(), gpl, path.delta_d, grid);
  const FirstPassagePmf law = first_passage_pmf(s, path.delta_d);

  CHECK(ks_distance(emp, law) < 0.018);  // 1.95/sqrt(n) + grid slack
}

TEST_CASE("fading trials follow the fading chain law") {
  ChannelParams p = sf_params();
  p.multipath = Rician{1.59};
  DiscretizedPath path = make_straight_path(toward_operator(), 16.0, 0.03);
  McConfig cfg;
  cfg.trials = 20000;
  cfg.seed = 7;
  cfg.horizon_steps = 500;
  cfg.conditioning = Conditioning::below_threshold;
  const EmpiricalFpd emp = empirical_fpd(path, p, cfg);

  std::vector<double> gpl = path_loss_along_path(p, path).value;
  gpl.resize(static_cast<std::size_t>(cfg.horizon_steps) + 1);
  const GammaGrid grid = make_gamma_grid(p.sigma_sh());
  const SurvivalSequence s = survival_probability(
      p, MultipathCdf::rician(1.59, -45.0, 25.0), gpl, path.delta_d, grid);
  const FirstPassagePmf law = first_passage_pmf(s, path.delta_d);

  CHECK(ks_distance(emp, law) < 0.018);
}

TEST_CASE("trial dump carries censor sentinels") {
  ChannelParams p = sf_params();
  DiscretizedPath path = make_straight_path(toward_operator(), 4.0, 0.5);
  McConfig cfg;
  cfg.trials = 50;
  cfg.seed = 3;
  cfg.horizon_steps = 6;
  cfg.conditioning = Conditioning::below_threshold;
  const EmpiricalFpd emp = empirical_fpd(path, p, cfg);
  REQUIRE(emp.censored_count > 0);  // the short horizon censors plenty

  std::ostringstream out;
  dump_trials_csv(out, emp);
  std::istringstream in(out.str());
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "trial,crossing_step,crossing_distance_m,censored");
  std::size_t rows = 0, censored = 0;
  while (std::getline(in, line)) {
    if (line.find(",-1,-1,1") != std::string::npos) ++censored;
    ++rows;
  }
  CHECK(rows == cfg.trials);
  CHECK(censored == emp.censored_count);
}

TEST_CASE("configuration and feasibility guards") {
  ChannelParams p = sf_params();
  DiscretizedPath path = make_straight_path(toward_operator(), 5.0, 0.5);
  McConfig cfg;
  cfg.trials = 10;
  cfg.seed = 1;
  cfg.horizon_steps = 8;

  SUBCASE("horizon longer than the path") {
    cfg.horizon_steps = 200;
    CHECK_THROWS_AS(empirical_fpd(path, p, cfg), std::invalid_argument);
  }
  SUBCASE("no trials requested") {
    cfg.trials = 0;
    CHECK_THROWS_AS(empirical_fpd(path, p, cfg), std::invalid_argument);
  }
  SUBCASE("hopeless conditioning aborts with a clear error") {
    ChannelParams hi = p;
    hi.k_db = 30.0;  // start sits far above the threshold
    cfg.conditioning = Conditioning::below_threshold;
    CHECK_THROWS_AS(empirical_fpd(path, hi, cfg), std::runtime_error);
  }
  SUBCASE("factorization size cap") {
    StraightGeometry g;
    g.d_src = 550.0;
    g.theta_src = kPi / 2.0;
    DiscretizedPath long_path = make_straight_path(g, 202.0, 0.01);
    REQUIRE(long_path.points.size() > 20000);
    cfg.horizon_steps = static_cast<int>(long_path.points.size()) - 1;
    CHECK_THROWS_AS(empirical_fpd(long_path, p, cfg), std::invalid_argument);
  }
}
