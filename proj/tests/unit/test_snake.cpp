#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "hpl/analytic.hpp"
#include "hpl/error.hpp"
#include "hpl/snake.hpp"
#include "hpl/stats.hpp"

using namespace hpl;
using namespace hpl::snake;

namespace {
SnakeSampleConfig traj_cfg() {
  SnakeSampleConfig c;
  c.eps_height = 0.05;
  c.label_step = 0.02;
  c.max_resolution = 0.01;
  return c;
}
}  // namespace

TEST(DustRate, Limits) {
  // Without a height bound the rate is the hitting measure 3/(2 d^2).
  for (double d : {0.5, 1.0, 2.0}) {
    double cut = 1e4 * d * d;
    EXPECT_NEAR(dust_hit_rate(d, cut), analytic::hitting_prob(d, 0) - 0.5 / cut, 1e-6 / (d * d));
  }
  EXPECT_LT(dust_hit_rate(1, 0.01), 1e-12);
  EXPECT_TRUE(std::isinf(dust_hit_rate(0, 1)));
  EXPECT_THROW(dust_hit_rate(1, 0), Error);
}

TEST(DustRate, MonotoneAndScaling) {
  double prev = 0;
  for (double cut : {0.05, 0.1, 0.3, 1.0, 3.0}) {
    double v = dust_hit_rate(1, cut);
    EXPECT_GT(v, prev);
    prev = v;
  }
  // N_{cd}(hit, H < c^2 h) = N_d(hit, H < h) / c^2.
  for (double c : {0.5, 3.0}) EXPECT_NEAR(dust_hit_rate(c, c * c * 0.4), dust_hit_rate(1, 0.4) / (c * c), 1e-9);
}

TEST(Tree, StructureAndHeights) {
  RngStream rng(1, 0);
  auto cfg = traj_cfg();
  for (int k = 0; k < 20; ++k) {
    double h = sample_height(cfg.eps_height, rng);
    auto t = grow_tree(1, h, cfg, rng);
    ASSERT_TRUE(t.complete);
    double top = 0;
    for (std::size_t i = 1; i < t.nodes.size(); ++i) {
      const auto& n = t.nodes[i];
      ASSERT_GE(n.parent, 0);
      ASSERT_LT(static_cast<std::size_t>(n.parent), i);
      ASSERT_GT(n.height, t.nodes[n.parent].height);
      top = std::max(top, n.height);
    }
    EXPECT_NEAR(top, h, 1e-9 * h);
  }
}

TEST(Tree, HeightLaw) {
  RngStream rng(2, 0);
  std::vector<double> h(20000);
  for (auto& x : h) x = sample_height(0.1, rng);
  auto ks = stats::ks_test(h, [](double x) { return x < 0.1 ? 0.0 : 1 - 0.1 / x; });
  EXPECT_GT(ks.p_value, 0.01);
}

TEST(Tree, MeanDuration) {
  // A tree with spine length H has mean duration 2 H^2 / 3 per unit of tree
  // (both sides): E sigma = (4/3) int_0^H (H - u) du = 2 H^2 / 3.
  RngStream rng(3, 0);
  auto c = traj_cfg();
  c.tree_resolution = 1e-2;
  c.max_resolution = 0.05;
  std::vector<double> s(4000);
  for (auto& x : s) x = grow_tree(0, 1.0, c, rng).duration();
  auto m = stats::mean_se(s);
  EXPECT_GT(m.stderr, 0);
  EXPECT_NEAR(m.mean, 2.0 / 3.0, 4 * m.stderr + 1e-9);
}

TEST(Trajectory, Invariants) {
  RngStream rng(4, 0);
  auto cfg = traj_cfg();
  for (int k = 0; k < 10; ++k) {
    auto t = sample_snake(1.5, cfg, rng);
    validate(t);
    EXPECT_EQ(t.tip.front(), 1.5);
    EXPECT_LE(w_star(t), 1.5);
    EXPECT_NEAR(t.sigma(), t.s_grid.back(), 0);
  }
}

TEST(Trajectory, TruncateKeepsExitMeasure) {
  RngStream rng(5, 0);
  auto cfg = traj_cfg();
  cfg.eps_height = 0.5;
  int compared = 0;
  for (int k = 0; k < 30; ++k) {
    auto t = sample_snake(1.0, cfg, rng);
    if (w_star(t) > 0.7) continue;
    auto tr = truncate(t, 0.7);
    validate(tr);
    EXPECT_LE(tr.sigma(), t.sigma() + 1e-12);
    double a = exit_measure_estimate(t, 0.7, 0.1), b = exit_measure_estimate(tr, 0.7, 0.1);
    EXPECT_NEAR(a, b, 1e-9 * std::max(1.0, a));
    ++compared;
  }
  EXPECT_GT(compared, 3);
}

TEST(Trajectory, ResolutionFlag) {
  RngStream rng(6, 0);
  auto t = sample_snake(1, traj_cfg(), rng);
  EXPECT_THROW(exit_measure_estimate(t, 0.5, 0.05), Error);
  EXPECT_THROW(truncate(t, 2), Error);
}

TEST(Trajectory, RescaleScalesLaw) {
  RngStream rng(7, 0);
  auto t = sample_snake(0, traj_cfg(), rng);
  auto u = rescale(t, 2);
  validate(u);
  EXPECT_NEAR(u.sigma(), 16 * t.sigma(), 1e-9 * u.sigma());
  EXPECT_NEAR(w_star(u), 2 * w_star(t), 1e-12);
  EXPECT_THROW(rescale(t, 0), Error);
}

TEST(Trajectory, CsvSchema) {
  RngStream rng(8, 0);
  auto t = sample_snake(0, traj_cfg(), rng);
  std::ostringstream os;
  write_csv(os, t);
  EXPECT_EQ(os.str().rfind("# schema=1\ns,zeta,tip\n", 0), 0u);
}

TEST(Estimators, HittingSmall) {
  SnakeSampleConfig c = counting_config();
  c.eps_height = 0.01;
  std::vector<double> v(20000);
  for (std::size_t i = 0; i < v.size(); ++i) {
    RngStream rng(9, i);
    v[i] = hitting_tree(1, -1, c, rng) / (2 * c.eps_height);
  }
  auto m = stats::mean_se(v);
  EXPECT_NEAR(m.mean, 0.375, 4 * m.stderr + 0.005);
}

TEST(Estimators, ExitCountSmall) {
  SnakeSampleConfig c = counting_config();
  c.eps_height = 0.05;
  std::vector<double> v(5000);
  for (std::size_t i = 0; i < v.size(); ++i) {
    RngStream rng(10, i);
    double h = sample_height(c.eps_height, rng);
    auto e = exit_count_tree(2, h, 1, 0.5, c, rng);
    EXPECT_GE(e.z, 0);
    EXPECT_LE(e.v_below, e.mass + 1e-12);
    v[i] = e.z / (2 * c.eps_height);
  }
  auto m = stats::mean_se(v);
  EXPECT_NEAR(m.mean, 0.125, 4 * m.stderr + 0.005);
}

TEST(Estimators, PositiveMass) {
  // N_x(sigma 1{W_* > 0} | H = h) is below the unkilled mean 2 h^2 / 3.
  SnakeSampleConfig c = counting_config();
  std::vector<double> v(4000);
  for (std::size_t i = 0; i < v.size(); ++i) {
    RngStream rng(11, i);
    v[i] = positive_mass_tree(0.5, 1.0, c, rng);
  }
  auto m = stats::mean_se(v);
  EXPECT_LT(m.mean, 2.0 / 3.0);
  EXPECT_GT(m.mean, 0);
}

TEST(SnakeConfig, Validation) {
  SnakeSampleConfig c;
  c.eps_height = 0;
  EXPECT_THROW(validate(c), Error);
  c = {};
  c.max_resolution = c.tree_resolution / 2;
  EXPECT_THROW(validate(c), Error);
  c = {};
  c.max_nodes = 10;
  RngStream rng(12, 0);
  EXPECT_THROW(grow_tree(0, 10.0, c, rng), Error);
}
