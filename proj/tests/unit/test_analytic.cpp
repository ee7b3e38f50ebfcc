#include <gtest/gtest.h>

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "hpl/analytic.hpp"
#include "hpl/error.hpp"

using namespace hpl::analytic;

namespace {
const double kE = std::exp(1.0);

template <class F>
double integrate(F f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-12);
}
}  // namespace

TEST(Psi, FrozenValues) {
  EXPECT_EQ(psi_levy(0), 0);
  EXPECT_NEAR(psi_levy(0.25), 0.3019685148616820, 1e-13);
  EXPECT_NEAR(psi_levy(0.5), 0.7236012545582677, 1e-13);
  EXPECT_NEAR(psi_levy(1), 1.842635463847123, 1e-12);
  EXPECT_NEAR(psi_levy(2), 4.913694570258993, 1e-12);
  EXPECT_NEAR(psi_levy(5), 18.71883645812950, 1e-11);
}

TEST(Psi, GammaRatioForm) {
  for (double q : {0.1, 0.7, 3.3, 60.0}) {
    double ref = std::sqrt(8.0 / 3.0) * q * std::exp(std::lgamma(q + 1) - std::lgamma(q + 0.5));
    EXPECT_NEAR(psi_levy(q), ref, 1e-12 * std::max(1.0, ref));
  }
}

TEST(Psi, LevyKhintchineAgrees) {
  for (double q : {0.25, 0.5, 1.0, 2.0, 5.0}) EXPECT_NEAR(psi_levy_lk(q), psi_levy(q), 1e-6) << q;
  EXPECT_NEAR(psi_levy_lk(0), 0, 1e-10);
}

TEST(Psi, IncreasingConvex) {
  double prev = 0, prev_slope = 0;
  for (int k = 1; k <= 40; ++k) {
    double q = 0.25 * k, v = psi_levy(q);
    double slope = (v - prev) / 0.25;
    EXPECT_GT(v, prev);
    EXPECT_GE(slope, prev_slope - 1e-12);
    prev = v;
    prev_slope = slope;
  }
}

TEST(Psi, DomainError) { EXPECT_THROW(psi_levy(-1), hpl::Error); }

TEST(Csbp, Mechanisms) {
  auto m0 = csbp_mechanisms(0);
  EXPECT_EQ(m0.Psi, 0);
  EXPECT_EQ(m0.H, 0);
  auto m1 = csbp_mechanisms(1);
  EXPECT_NEAR(m1.Psi, 1.632993161855452, 1e-12);
  EXPECT_NEAR(m1.H, 1.632993161855452, 1e-12);
  auto m4 = csbp_mechanisms(4);
  EXPECT_NEAR(m4.Psi, 13.06394529484362, 1e-11);
  EXPECT_NEAR(m4.H, 3.265986323710904, 1e-12);
  EXPECT_THROW(csbp_mechanisms(-1), hpl::Error);
}

TEST(Csbp, ULambda) {
  EXPECT_DOUBLE_EQ(u_lambda(2, 0), 2);
  EXPECT_NEAR(u_lambda(1, 1), std::pow(1 + std::sqrt(2.0 / 3.0), -2), 1e-15);
  for (double l : {0.5, 1.0, 3.0})
    for (double s : {0.1, 0.7, 2.0}) {
      double h = 1e-5;
      double d = (u_lambda(l, s + h) - u_lambda(l, s - h)) / (2 * h);
      double psi = csbp_mechanisms(u_lambda(l, s)).Psi;
      EXPECT_NEAR(d, -psi, 1e-6 * std::max(1.0, psi));
    }
  EXPECT_THROW(u_lambda(0, 1), hpl::Error);
}

TEST(Csbp, ImmigrationLt) {
  EXPECT_NEAR(csbp_imm_lt(0, 1, 1.5), 0.25, 1e-15);
  EXPECT_DOUBLE_EQ(csbp_imm_lt(2.5, 0.3, 0), 1);
  EXPECT_NEAR(csbp_imm_lt(1, 0, 1), std::exp(-1.0), 1e-15);
}

TEST(Csbp, HFunctionSemigroup) {
  EXPECT_DOUBLE_EQ(h_func(1, 0), 1);
  EXPECT_DOUBLE_EQ(h_func(2, 0), 0.25);
  double x = 1, s = 1, a = 1;
  EXPECT_NEAR(csbp_imm_lt(x, s, 1.5 / (a * a)) / (a * a), h_func(a + s, x), 1e-14);
  EXPECT_THROW(h_func(0, 1), hpl::Error);
}

TEST(Snake, HittingProb) {
  EXPECT_DOUBLE_EQ(hitting_prob(1, 0), 1.5);
  EXPECT_DOUBLE_EQ(hitting_prob(2, 0), 0.375);
  EXPECT_DOUBLE_EQ(hitting_prob(1, -1), 0.375);
  EXPECT_NEAR(hitting_prob(3, 0), hitting_prob(1, 0) / 9, 1e-15);
  EXPECT_THROW(hitting_prob(0, 1), hpl::Error);
}

TEST(Snake, ExitLt) {
  EXPECT_DOUBLE_EQ(exit_lt(2, 1, 0), 0);
  EXPECT_NEAR(exit_lt(2, 1, INFINITY), 1.125, 1e-14);
  double h = 1e-6;
  EXPECT_NEAR((exit_lt(2, 1, h) - exit_lt(2, 1, 0)) / h, 0.125, 1e-5);
  double prev = 0;
  for (double l : {0.1, 1.0, 10.0, 100.0}) {
    double v = exit_lt(2, 1, l);
    EXPECT_GT(v, prev);
    prev = v;
  }
  EXPECT_THROW(exit_lt(1, 1, 1), hpl::Error);
}

TEST(Snake, ExitOccupationMeanFrozen) {
  EXPECT_NEAR(exit_occupation_mean(2, 1, 0.2), 0.1293627, 1e-6);
  EXPECT_NEAR(exit_occupation_mean(2, 1, 0.1), 0.1261612, 1e-6);
  EXPECT_NEAR(exit_occupation_mean(2, 1, 0.05), 0.1253007, 1e-6);
  EXPECT_NEAR(exit_occupation_mean(2, 1, 0.025), 0.1250766, 1e-6);
}

TEST(Hull, GMu) {
  EXPECT_NEAR(g_mu(1, 1), 0.1626048574752719, 1e-13);
  EXPECT_NEAR(g_mu(1e-12, 1), 0, 1e-9);
  EXPECT_NEAR(g_mu(2, 50), 1 - 1.5 / 2500, 1e-12);
  // Independent coth route.
  double z = std::pow(2.0, 0.25);
  double c = std::cosh(z) / std::sinh(z);
  EXPECT_NEAR(g_mu(1, 1), std::sqrt(0.5) * (3 * c * c - 2) - 1.5, 1e-10);
  EXPECT_THROW(g_mu(0, 1), hpl::Error);
}

TEST(Hull, CothDefectSeries) {
  for (double z : {1e-6, 1e-3, 0.1})
    EXPECT_NEAR(coth_defect(z), z * z / 5, 0.04 * std::pow(z, 4) + 1e-15);
  double z = 2;
  double c = 1 / std::tanh(z);
  EXPECT_NEAR(coth_defect(z), 3 * c * c - 2 - 3 / (z * z), 1e-14);
}

TEST(Hull, BigG) {
  EXPECT_NEAR(big_G(1, 1, 1), 0.7595097024929021, 1e-13);
  EXPECT_NEAR(big_G(1, 0, 0), 1, 1e-15);
  EXPECT_NEAR(big_G(1, 0, 1.5), 2 / kE, 1e-15);
  EXPECT_NEAR(big_G(1, 1e-14, 1.5), 2 / kE, 1e-6);
  for (double r : {0.5, 2.0})
    for (double nu : {0.3, 2.0}) EXPECT_NEAR(big_G(r, 0, nu), gamma_lt(r, nu), 1e-14);
}

TEST(Hull, JointLt) {
  EXPECT_NEAR(joint_hull_lt({1, 1, 1, 1, 1}), 0.3249759271797321, 1e-13);
  EXPECT_NEAR(joint_hull_lt({1, 0, 0, 0, 0}), 1, 1e-14);
  EXPECT_NEAR(joint_hull_lt({1, 1.5, 0, 0, 0}), 0.5, 1e-14);
  EXPECT_NEAR(joint_hull_lt({1, 0, 1.5, 0, 0}), 2 / kE, 1e-14);
  for (double r : {0.5, 1.0, 3.0})
    for (double l : {0.0, 0.4, 2.0}) {
      EXPECT_NEAR(joint_hull_lt({r, l, 0, 0, 0}), 1 / (1 + 2 * l * r * r / 3), 1e-13);
      EXPECT_NEAR(joint_hull_lt({r, 0, l, 0, 0}), gamma_lt(r, l), 1e-13);
    }
}

TEST(Hull, ZV0Factor) {
  EXPECT_NEAR(z_v0_lt(1, 1, 1), 0.5633580949079790, 1e-13);
  // The joint transform factorizes into the Z/V0 factor and two G factors.
  for (double mu : {0.3, 1.0, 4.0}) {
    double lhs = joint_hull_lt({1.3, 0.7, 0.2, 1.1, mu});
    double rhs = z_v0_lt(1.3, 0.7, mu) * big_G(1.3, mu, 0.2) * big_G(1.3, mu, 1.1);
    EXPECT_NEAR(lhs, rhs, 1e-12);
  }
}

TEST(Hull, BetaDensity) {
  for (double r : {0.5, 1.0, 3.0}) {
    double scale = r * r;
    auto f = [r](double t) { return beta_density(r, t); };
    double mass = integrate(f, 0, scale) + integrate([&](double u) { return f(scale / u) * scale / (u * u); }, 0, 1);
    EXPECT_NEAR(mass, 1, 1e-8) << r;
    for (double t : {0.05, 0.3, 2.0}) {
      double t2 = t * scale;
      EXPECT_NEAR(beta_cdf(r, t2), boost::math::gamma_q(1.5, r * r / (6 * t2)), 1e-12);
      double h = 1e-6 * t2;
      EXPECT_NEAR((beta_cdf(r, t2 + h) - beta_cdf(r, t2 - h)) / (2 * h), beta_density(r, t2),
                  1e-6 * std::max(1.0, beta_density(r, t2)));
    }
  }
  auto tf = [](double t) { return t * beta_density(1, t); };
  double mean = integrate(tf, 0, 1) + integrate([&](double u) { return tf(1 / u) / (u * u); }, 0, 1);
  EXPECT_NEAR(mean, 1.0 / 3.0, 1e-5);
  double mode = 1.0 / 15.0, h = 1e-4;
  EXPECT_GT(beta_density(1, mode), beta_density(1, mode - h));
  EXPECT_GT(beta_density(1, mode), beta_density(1, mode + h));
}

TEST(Perimeter, TwoPoint) {
  EXPECT_DOUBLE_EQ(two_point_perimeter_lt(1, 0, 0), 1);
  EXPECT_NEAR(two_point_perimeter_lt(1, 0, 1), 0.2, 1e-15);
  for (double t : {0.2, 1.0, 5.0}) EXPECT_NEAR(two_point_perimeter_lt(t, 2, 0), 1.0 / 3.0, 1e-15);
}

TEST(Perimeter, CondBackward) {
  // The closed form at (s, t, z, lambda) = (1, 2, 0, 3/2) is (2 / (1 + sqrt 2))^2.
  EXPECT_NEAR(cond_backward_lt(1, 2, 0, 1.5), std::pow(2 / (1 + std::sqrt(2.0)), 2), 1e-15);
  EXPECT_NEAR(cond_backward_lt(1, 2, 0, 1.5), 0.6862915010152396, 1e-14);
  EXPECT_NEAR(cond_backward_lt(1, 2, 1, 1.5), 0.5968010691156158, 1e-14);
  for (double z : {0.0, 0.4, 3.0}) EXPECT_NEAR(cond_backward_lt(1.5, 1.5, z, 0.8), std::exp(-0.8 * z), 1e-13);
  // Tower property over Z_t ~ Exp(mean 2 t^2 / 3).
  for (auto [s, t, l] : {std::tuple{1.0, 2.0, 1.5}, std::tuple{0.3, 1.0, 4.0}}) {
    double rate = 1.5 / (t * t);
    auto f = [&](double u) {
      double z = -std::log(u) / rate;
      return cond_backward_lt(s, t, z, l);
    };
    double v = integrate(f, 0, 1);
    EXPECT_NEAR(v, 1 / (1 + 2 * l * s * s / 3), 1e-8);
  }
  EXPECT_THROW(cond_backward_lt(2, 1, 0, 1), hpl::Error);
}

TEST(Perimeter, Moments) {
  EXPECT_NEAR(moments_ssmp(0, 1, 1), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(moments_ssmp(0, 1, 2), 8.0 / 9.0, 1e-15);
  EXPECT_NEAR(moments_ssmp(0, 2, 3), 6 * std::pow(2.0 / 3.0, 3) * std::pow(2.0, 6), 1e-10);
  for (int p : {1, 2, 3}) EXPECT_NEAR(moments_ssmp(1.7, 0, p), std::pow(1.7, p), 1e-12);
  // Scaling: E_x[Y_{ct}^p] = c^{2p} E_{x/c^2}[Y_t^p].
  EXPECT_NEAR(moments_ssmp(2.0, 2.0, 2), 16 * moments_ssmp(0.5, 1.0, 2), 1e-10);
}

TEST(Appendix, FfOde) {
  for (auto [s, a, nu] : {std::tuple{0.5, 1.0, 1.0}, std::tuple{0.2, 0.7, 0.0}, std::tuple{1.3, 2.0, 3.0}}) {
    double h = 1e-4;
    auto F = [&](double x) { return appendix_F_f(x, a, nu).F; };
    double d2 = (F(s + h) - 2 * F(s) + F(s - h)) / (h * h);
    auto v = appendix_F_f(s, a, nu);
    EXPECT_NEAR(d2, 2 * v.f * v.F, 1e-6 * std::abs(2 * v.f * v.F) + 1e-6);
  }
  double a = 1, nu = 1, s = 30;
  double k = std::sqrt(2 * (a * a + nu));
  EXPECT_NEAR(appendix_F_f(s, a, nu).F * std::exp(s * k), a + std::sqrt(2.0 / 3.0 * (a * a + nu)), 1e-10);
  for (double r : {0.5, 1.0, 2.0}) {
    double aa = 1.1, mu = std::pow(aa, 4) / 2;
    EXPECT_NEAR(r * appendix_F_f(r / std::sqrt(3.0), aa, 0.6).F, big_G(r, mu, 0.6), 1e-12);
  }
}

TEST(Appendix, Tec) {
  EXPECT_DOUBLE_EQ(tec_formu_value(1, 2, 0), 1);
  EXPECT_NEAR(tec_formu_value(1, 2, 0.5), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(tec_formu_value(1, 1e12, 0.5), 0.5, 1e-10);
  EXPECT_THROW(tec_formu_value(2, 1, 0.5), hpl::Error);
}

TEST(Analytic, Pure) {
  EXPECT_EQ(big_G(1.3, 0.7, 0.2), big_G(1.3, 0.7, 0.2));
  EXPECT_EQ(psi_levy_lk(1.7), psi_levy_lk(1.7));
}
