#include <gtest/gtest.h>

#include <cmath>

#include "hpl/analytic.hpp"
#include "hpl/error.hpp"
#include "hpl/hull.hpp"
#include "hpl/stats.hpp"

using namespace hpl;
using namespace hpl::hull;

TEST(HullExact, Invariants) {
  RngStream rng(1, 0);
  for (int k = 0; k < 1000; ++k) {
    auto h = sample_hull_exact(1.5, rng);
    validate(h);
    EXPECT_GT(h.beta, 0);
    EXPECT_GT(h.gamma, 0);
    EXPECT_NEAR(h.z, h.z_left + h.z_right, 1e-12 * (1 + h.z));
  }
  EXPECT_THROW(sample_hull_exact(0, rng), Error);
}

TEST(HullExact, MomentsAndLaws) {
  std::vector<double> b(20000), z(20000);
  for (std::size_t i = 0; i < b.size(); ++i) {
    RngStream rng(2, i);
    auto h = sample_hull_exact(1, rng);
    b[i] = h.beta;
    z[i] = h.z;
  }
  auto mb = stats::mean_se(b), mz = stats::mean_se(z);
  EXPECT_NEAR(mb.mean, 1.0 / 3.0, 4 * mb.stderr);
  EXPECT_NEAR(mz.mean, 2.0 / 3.0, 4 * mz.stderr);
  EXPECT_GT(stats::ks_test(b, [](double t) { return analytic::beta_cdf(1, t); }).p_value, 0.01);
  EXPECT_GT(stats::ks_test(z, [](double x) { return 1 - std::exp(-1.5 * x); }).p_value, 0.01);
}

TEST(HullExact, ValidateRejects) {
  HullSample h;
  h.beta = -1;
  EXPECT_THROW(validate(h), Error);
  h = {};
  h.beta = h.gamma = 1;
  h.z_left = 1;
  h.z_right = 1;
  h.z = 5;
  EXPECT_THROW(validate(h), Error);
}

TEST(HullConstructive, SmallRun) {
  ConstructiveHullConfig cfg;
  validate(cfg);
  std::vector<double> z(60);
  for (std::size_t i = 0; i < z.size(); ++i) {
    RngStream rng(3, i);
    ConstructiveDiagnostics d;
    auto h = sample_hull_constructive(cfg, rng, &d);
    validate(h);
    EXPECT_GT(d.tail_mean, 0);
    z[i] = h.z;
  }
  auto m = stats::mean_se(z);
  EXPECT_NEAR(m.mean, 2.0 / 3.0, 4 * m.stderr + 0.07);
  cfg.exit_depth = 2;
  EXPECT_THROW(validate(cfg), Error);
}

TEST(FeynmanKac, GammaVolumeSmall) {
  McOptions mc;
  auto e = fk_gamma_volume_lt(1, 1, 1, 4000, mc);
  EXPECT_NEAR(e.estimate, analytic::big_G(1, 1, 1), 4 * e.stderr + 1e-3);
  auto z = fk_gamma_volume_lt(1, 0, 1.5, 4000, mc);
  EXPECT_NEAR(z.estimate, 2 / std::exp(1.0), 4 * z.stderr + 1e-3);
}

TEST(FeynmanKac, SharedPathsMatch) {
  RngStream a(4, 0), b(4, 0);
  auto v = fk_gamma_volume_path(1, {{1, 1}, {0, 1.5}}, a);
  ASSERT_EQ(v.size(), 2u);
  auto w = fk_gamma_volume_path(1, {{1, 1}}, b);
  EXPECT_DOUBLE_EQ(v[0], w[0]);
  for (double x : v) {
    EXPECT_GT(x, 0);
    EXPECT_LE(x, 1);
  }
}

TEST(FeynmanKac, TecSmall) {
  McOptions mc;
  auto e = fk_tec_formu(1, 2, 0.5, 2000, mc);
  EXPECT_NEAR(e.estimate, analytic::tec_formu_value(1, 2, 0.5), 4 * e.stderr + 1e-3);
}

TEST(FeynmanKac, WorkerInvariance) {
  McOptions one, three;
  three.workers = 3;
  auto a = fk_gamma_volume_lt(1, 1, 1, 300, one);
  auto b = fk_gamma_volume_lt(1, 1, 1, 300, three);
  EXPECT_EQ(a.estimate, b.estimate);
  EXPECT_EQ(a.stderr, b.stderr);
}
