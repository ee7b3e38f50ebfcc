#include <gtest/gtest.h>

#include <cmath>

#include <boost/math/distributions/gamma.hpp>

#include "hpl/analytic.hpp"
#include "hpl/error.hpp"
#include "hpl/sampler.hpp"
#include "hpl/stats.hpp"

using namespace hpl;
using namespace hpl::sampler;

TEST(Rng, StreamsReproducible) {
  RngStream a(7, 3), b(7, 3), c(7, 4);
  for (int i = 0; i < 10; ++i) {
    double x = a.uniform();
    EXPECT_EQ(x, b.uniform());
    EXPECT_NE(x, c.uniform());
    EXPECT_GT(x, 0);
    EXPECT_LT(x, 1);
  }
  EXPECT_EQ(a.substream(5).uniform(), b.substream(5).uniform());
}

TEST(Bessel, SquaredStepMean) {
  RngStream rng(1, 0);
  for (int dim : {3, 5}) {
    std::vector<double> v(20000);
    for (auto& x : v) x = bessel_sq_step(dim, 0.7, 0.3, rng);
    auto m = stats::mean_se(v);
    EXPECT_NEAR(m.mean, 0.7 + dim * 0.3, 4 * m.stderr);
  }
}

TEST(Bessel, PathOnGrid) {
  RngStream rng(2, 0);
  std::vector<double> grid{0.0, 0.5, 1.0};
  std::vector<double> end(20000);
  for (auto& e : end) {
    auto p = bessel_path(5, 0, grid, rng);
    validate(p);
    EXPECT_EQ(p.values.size(), 3u);
    e = p.values.back() * p.values.back();
  }
  auto m = stats::mean_se(end);
  EXPECT_NEAR(m.mean, 5.0, 4 * m.stderr);  // E R_1^2 = 5
}

TEST(Bessel, MinusOneStopsAtBarrier) {
  RngStream rng(3, 0);
  BesselOptions o;
  o.barrier = 1;
  std::vector<double> grid{0.0, 100.0};
  auto p = bessel_path(-1, 2, grid, rng, o);
  EXPECT_LE(p.values.back(), 1.0 + 1e-12);
  EXPECT_THROW(bessel_path(7, 1, grid, rng), Error);
}

TEST(Bessel, LastPassageLaw) {
  // The last passage of Bessel(5) at r / sqrt 3 is the inverse of Gamma(3/2, rate r^2/6).
  RngStream rng(4, 0);
  SpineOptions o;
  o.record_path = false;
  std::vector<double> tau(4000);
  for (auto& t : tau) {
    auto lp = last_passage_time(1.0, 1e-4, rng, o);
    EXPECT_NEAR(lp.level, 1 / std::sqrt(3.0), 1e-15);
    EXPECT_NEAR(lp.M, lp.level * std::pow(1e-4, -1.0 / 3.0), 1e-12);
    t = lp.tau;
  }
  auto ks = stats::ks_test(tau, [](double t) { return analytic::beta_cdf(1, t); });
  EXPECT_GT(ks.p_value, 0.01);
}

TEST(Gamma, ExponentialMeanAndHalfShapeLt) {
  RngStream rng(5, 0);
  std::vector<double> e(100000), h(100000);
  for (auto& x : e) x = gamma_sample(1, 0.8, rng);
  for (auto& x : h) x = gamma_sample(0.5, 2.0 / 3.0, rng);
  auto m = stats::mean_se(e);
  EXPECT_NEAR(m.mean, 0.8, 3 * m.stderr);
  for (double l : {0.5, 2.0}) {
    auto lt = stats::empirical_lt(h, {l})[0];
    EXPECT_NEAR(lt.estimate, std::pow(1 + 2 * l / 3, -0.5), 3 * lt.stderr);
  }
  EXPECT_THROW(gamma_sample(0, 1, rng), Error);
}

TEST(Stable, LaplaceTransform) {
  RngStream rng(6, 0);
  for (double alpha : {0.5, 1.5}) {
    double dt = 0.3, l = 0.7;
    std::vector<double> w(50000);
    for (auto& x : w) x = std::exp(-l * stable_increment(alpha, 1, dt, rng));
    auto m = stats::mean_se(w);
    double c = stable_laplace_constant(alpha);
    // alpha < 1 is positive; alpha > 1 with skew 1 has exponent -c' l^alpha with cos < 0.
    double target = std::exp(-dt * std::pow(l, alpha) / std::cos(M_PI * alpha / 2));
    EXPECT_NEAR(m.mean, target, 4 * m.stderr) << alpha;
    EXPECT_NEAR(c, 1 / std::abs(std::cos(M_PI * alpha / 2)), 1e-14);
  }
}

TEST(Levy, TruncatedExponentConverges) {
  LevyXiConfig c;
  c.jump_cutoff_eps = 1e-2;
  LevyXiStepper coarse(c);
  c.jump_cutoff_eps = 1e-3;
  LevyXiStepper fine(c);
  for (double q : {0.5, 1.0, 2.0}) {
    double e0 = std::abs(coarse.psi_truncated(q) - analytic::psi_levy(q));
    double e1 = std::abs(fine.psi_truncated(q) - analytic::psi_levy(q));
    EXPECT_LE(e1, e0 + 1e-12);
    EXPECT_LT(e1, 1e-3);
  }
  EXPECT_GE(fine.bias_bound(1, 1), 0);
}

TEST(Levy, PathMgf) {
  LevyXiConfig c;
  c.jump_cutoff_eps = 1e-2;
  LevyXiStepper st(c);
  RngStream rng(7, 0);
  std::vector<double> v(2000);
  for (auto& x : v) {
    auto p = levy_xi_path(1, c, rng);
    validate(p);
    EXPECT_DOUBLE_EQ(p.times.back(), 1.0);
    x = std::exp(0.5 * p.values.back());
  }
  auto m = stats::mean_se(v);
  EXPECT_NEAR(m.mean, std::exp(analytic::psi_levy(0.5)), 4 * m.stderr + st.bias_bound(0.5, 1));
}

TEST(Levy, ConfigValidation) {
  LevyXiConfig c;
  c.jump_cutoff_eps = 0;
  EXPECT_THROW(validate(c), Error);
  c = {};
  c.step = -1;
  EXPECT_THROW(validate(c), Error);
}

TEST(Poisson, CountsAndBound) {
  RngStream rng(8, 0);
  std::vector<double> n(4000);
  auto f = [](double t) { return 2 + t; };
  for (auto& k : n) k = static_cast<double>(poisson_points(f, 5, 0, 2, rng).size());
  auto m = stats::mean_se(n);
  EXPECT_NEAR(m.mean, 6.0, 4 * m.stderr);
  EXPECT_THROW(poisson_points(f, 1, 0, 2, rng), Error);
}

TEST(SamplePath, Validation) {
  SamplePath p{{0, 1, 1}, {0, 1, 2}, "x"};
  EXPECT_THROW(validate(p), Error);
  SamplePath q{{0, 1}, {0}, "x"};
  EXPECT_THROW(validate(q), Error);
}
