#include "hpl/analytic.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/binomial.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>

#include "hpl/error.hpp"

namespace hpl::analytic {

namespace {

const double kSqrt83 = std::sqrt(8.0 / 3.0);
const double kSqrt23 = std::sqrt(2.0 / 3.0);
const double kPi = 3.14159265358979323846;

// Values that are probabilities or Laplace transforms must land in [0, 1].
double checked_unit(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0 + 1e-12)) fail(ErrorKind::numerical, what);
  return v;
}

// z coth z, with the removable singularity at 0 handled by its series.
double zcoth(double z) {
  if (z < 1e-4) return 1.0 + z * z / 3.0;
  return z / std::tanh(z);
}

// ((1-u)^q - 1 + q u) / u^2
double lk_kernel(double q, double u) {
  if (u < 1e-3) {
    double c = q * (q - 1) / 2, sum = 0, term = 1;
    for (int j = 2; j < 8; ++j) {
      sum += c * term;
      c *= -(q - j) / (j + 1);
      term *= u;
    }
    return sum;
  }
  return (std::expm1(q * std::log1p(-u)) + q * u) / (u * u);
}

}  // namespace

double psi_levy(double q) {
  require(q >= 0, ErrorKind::domain, "psi_levy: q must be >= 0");
  if (q == 0) return 0;
  return kSqrt83 * q * std::exp(std::lgamma(q + 1) - std::lgamma(q + 0.5));
}

double psi_levy_lk(double q, double quad_tol) {
  require(q >= 0, ErrorKind::domain, "psi_levy_lk: q must be >= 0");
  require(quad_tol > 0, ErrorKind::domain, "psi_levy_lk: quad_tol must be > 0");
  if (q == 0) return 0;
  // u = 1 - e^y, then u = v^2; the jump part becomes smooth on (0, 1).
  auto f = [q](double v) {
    double u = v * v;
    return 2.0 * lk_kernel(q, u) * (3.0 - u);
  };
  const double scale = 1.0 / std::sqrt(6.0 * kPi);
  double err = 0;
  boost::math::quadrature::tanh_sinh<double> ts;
  double jump = ts.integrate(f, 0.0, 1.0, 1e-14, &err);
  if (!(err * scale <= quad_tol)) fail(ErrorKind::quadrature, "psi_levy_lk: tolerance not reached");
  return 4.0 * std::sqrt(2.0 / (3.0 * kPi)) * q + scale * jump;
}

Mechanisms csbp_mechanisms(double lambda) {
  require(lambda >= 0, ErrorKind::domain, "csbp_mechanisms: lambda must be >= 0");
  double s = std::sqrt(lambda);
  return {kSqrt83 * lambda * s, kSqrt83 * s};
}

double u_lambda(double lambda, double s) {
  require(lambda > 0, ErrorKind::domain, "u_lambda: lambda must be > 0");
  require(s >= 0, ErrorKind::domain, "u_lambda: s must be >= 0");
  double d = 1.0 / std::sqrt(lambda) + s * kSqrt23;
  return 1.0 / (d * d);
}

double csbp_imm_lt(double x, double s, double lambda) {
  require(x >= 0 && s >= 0 && lambda >= 0, ErrorKind::domain, "csbp_imm_lt: arguments must be >= 0");
  if (lambda == 0) return 1;
  double imm = 1.0 + s * std::sqrt(2.0 * lambda / 3.0);
  return checked_unit(std::exp(-x * u_lambda(lambda, s)) / (imm * imm), "csbp_imm_lt out of range");
}

double h_func(double a, double x) {
  require(a > 0, ErrorKind::domain, "h_func: a must be > 0");
  require(x >= 0, ErrorKind::domain, "h_func: x must be >= 0");
  return std::exp(-1.5 * x / (a * a)) / (a * a);
}

double hitting_prob(double x, double y) {
  require(y < x, ErrorKind::domain, "hitting_prob: need y < x");
  double d = x - y;
  return 1.5 / (d * d);
}

double exit_lt(double x, double r, double lambda) {
  require(r > 0 && x > r, ErrorKind::domain, "exit_lt: need x > r > 0");
  require(lambda >= 0, ErrorKind::domain, "exit_lt: lambda must be >= 0");
  if (lambda == 0) return 0;
  double shift = std::isinf(lambda) ? 0.0 : 1.0 / std::sqrt(2.0 * lambda / 3.0 + 1.0 / (r * r));
  double d = x - r + shift;
  double v = 1.5 * (1.0 / (d * d) - 1.0 / (x * x));
  if (!(v >= 0)) fail(ErrorKind::numerical, "exit_lt negative");
  return v;
}

double exit_occupation_mean(double x, double r, double eps) {
  require(r > 0 && eps > 0 && x >= r + eps, ErrorKind::domain, "exit_occupation_mean: need x >= r + eps");
  double b = r + eps;
  double r5 = std::pow(r, 5), r7 = std::pow(r, 7);
  double bracket = (std::pow(b, 5) - r5) / 5.0 + r7 * (1.0 / (b * b) - 1.0 / (r * r)) / 2.0;
  return 2.0 * bracket / (7.0 * x * x * x * eps * eps);
}

double coth_defect(double z) {
  require(z > 0, ErrorKind::domain, "coth_defect: z must be > 0");
  if (z < 0.5) {
    static const double c[] = {1.0 / 5, -2.0 / 63, 1.0 / 225, -2.0 / 3465,
                               1382.0 / 19348875, -4.0 / 467775, 3617.0 / 3618239625.0,
                               -87734.0 / 764299911375.0, 349222.0 / 26865429215625.0,
                               -310732.0 / 213458046676875.0,
                               472728182.0 / 2926370608170384375.0};
    double z2 = z * z, zp = z2, sum = 0;
    for (double ck : c) {
      sum += ck * zp;
      zp *= z2;
    }
    return sum;
  }
  double th = std::tanh(z);
  return 3.0 / (th * th) - 2.0 - 3.0 / (z * z);
}

double g_mu(double mu, double x) {
  require(mu > 0, ErrorKind::domain, "g_mu: mu must be > 0");
  require(x > 0, ErrorKind::domain, "g_mu: x must be > 0");
  double a2 = std::sqrt(2.0 * mu);
  return 0.5 * a2 * coth_defect(std::sqrt(a2) * x);
}

double big_G(double r, double mu, double nu) {
  require(r > 0, ErrorKind::domain, "big_G: r must be > 0");
  require(mu >= 0 && nu >= 0, ErrorKind::domain, "big_G: mu, nu must be >= 0");
  double a2 = std::sqrt(2.0 * mu);
  double z = std::sqrt(a2) * r;
  double k = r * kSqrt23 * std::sqrt(a2 + nu);
  return checked_unit(std::exp(-k) * (zcoth(z) + k), "big_G out of range");
}

double joint_hull_lt(const HullLawParams& p) {
  require(p.r > 0, ErrorKind::domain, "joint_hull_lt: r must be > 0");
  require(p.lambda >= 0 && p.nu1 >= 0 && p.nu2 >= 0 && p.mu >= 0, ErrorKind::domain,
          "joint_hull_lt: transform arguments must be >= 0");
  double z = std::sqrt(std::sqrt(2.0 * p.mu)) * p.r;
  double zc = zcoth(z);
  double denom = 2.0 / 3.0 * p.lambda * p.r * p.r + zc * zc - 2.0 / 3.0 * z * z;
  double v = big_G(p.r, p.mu, p.nu1) * big_G(p.r, p.mu, p.nu2) / denom;
  return checked_unit(v, "joint_hull_lt out of range");
}

double z_v0_lt(double r, double lambda, double mu) {
  require(r > 0 && lambda >= 0 && mu >= 0, ErrorKind::domain, "z_v0_lt: bad arguments");
  double g = mu > 0 ? g_mu(mu, r) : 0.0;
  return checked_unit(1.0 / (1.0 + 2.0 * r * r / 3.0 * (lambda + g)), "z_v0_lt out of range");
}

double beta_density(double r, double t) {
  require(r > 0 && t > 0, ErrorKind::domain, "beta_density: r, t must be > 0");
  return std::pow(3.0, -1.5) * r * r * r / std::sqrt(2.0 * kPi) * std::pow(t, -2.5) *
         std::exp(-r * r / (6.0 * t));
}

double beta_cdf(double r, double t) {
  require(r > 0, ErrorKind::domain, "beta_cdf: r must be > 0");
  if (t <= 0) return 0;
  return boost::math::gamma_q(1.5, r * r / (6.0 * t));
}

double gamma_lt(double r, double nu) {
  require(r > 0 && nu >= 0, ErrorKind::domain, "gamma_lt: bad arguments");
  double k = r * std::sqrt(2.0 * nu / 3.0);
  return (1.0 + k) * std::exp(-k);
}

double two_point_perimeter_lt(double t, double lambda1, double lambda2) {
  require(t > 0, ErrorKind::domain, "two_point_perimeter_lt: t must be > 0");
  require(lambda1 >= 0 && lambda2 >= 0, ErrorKind::domain, "two_point_perimeter_lt: lambdas must be >= 0");
  double b = 1.0 + t * std::sqrt(1.0 + lambda1);
  return checked_unit(1.0 / (1.0 + lambda1 + lambda2 * b * b), "two_point_perimeter_lt out of range");
}

double cond_backward_lt(double s, double t, double z, double lambda) {
  require(s > 0 && t > 0, ErrorKind::domain, "cond_backward_lt: s, t must be > 0");
  require(s <= t, ErrorKind::domain, "cond_backward_lt: need s <= t");
  require(z >= 0 && lambda >= 0, ErrorKind::domain, "cond_backward_lt: z, lambda must be >= 0");
  if (lambda == 0) return 1;
  double pre = t / (s + (t - s) * std::sqrt(1.0 + 2.0 * lambda * s * s / 3.0));
  double d = t - s + 1.0 / std::sqrt(2.0 * lambda / 3.0 + 1.0 / (s * s));
  double v = pre * pre * std::exp(-1.5 * z * (1.0 / (d * d) - 1.0 / (t * t)));
  return checked_unit(v, "cond_backward_lt out of range");
}

double moments_ssmp(double x, double t, int p) {
  require(p >= 1, ErrorKind::domain, "moments_ssmp: p must be >= 1");
  require(x >= 0 && t >= 0, ErrorKind::domain, "moments_ssmp: x, t must be >= 0");
  double pf = std::tgamma(p + 1.0);
  if (x == 0) return pf * std::pow(2.0 / 3.0, p) * std::pow(t, 2 * p);
  double sum = 0;
  for (int k = 0; k <= 2 * p; ++k) {
    double c = boost::math::binomial_coefficient<double>(2 * p, k);
    sum += std::pow(2.0 / 3.0, 0.5 * k) * c * pf / std::tgamma(p + 1.0 - 0.5 * k) *
           std::pow(x, p - 0.5 * k) * std::pow(t, k);
  }
  return sum;
}

FPair appendix_F_f(double s, double a, double nu) {
  require(s > 0 && a > 0, ErrorKind::domain, "appendix_F_f: s, a must be > 0");
  require(nu >= 0, ErrorKind::domain, "appendix_F_f: nu must be >= 0");
  double c = 1.0 / std::tanh(a * std::sqrt(3.0) * s);
  double f = nu + a * a * (3.0 * c * c - 2.0);
  double F = std::exp(-s * std::sqrt(2.0 * (a * a + nu))) * (a * c + std::sqrt(2.0 / 3.0 * (a * a + nu)));
  return {F, f};
}

double tec_formu_value(double x, double y, double c) {
  require(c >= 0 && c < x && x < y, ErrorKind::domain, "tec_formu_value: need 0 <= c < x < y");
  return checked_unit((y / x) * (x - c) / (y - c), "tec_formu_value out of range");
}

}  // namespace hpl::analytic
