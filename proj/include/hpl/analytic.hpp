#pragma once

// Closed-form laws of hull statistics and of the perimeter process.
// Every function is pure and throws hpl::Error on invalid input.

namespace hpl::analytic {

struct HullLawParams {
  double r = 1;
  double lambda = 0;  // Laplace argument for the perimeter Z_r
  double nu1 = 0;     // for beta_r
  double nu2 = 0;     // for gamma_r
  double mu = 0;      // for the volume
};

struct Mechanisms {
  double Psi;  // branching
  double H;    // immigration
};

struct FPair {
  double F;
  double f;
};

// Laplace exponent of the Levy process driving the perimeter process.
double psi_levy(double q);
// Same exponent from its Levy-Khintchine integral, to absolute tolerance quad_tol.
double psi_levy_lk(double q, double quad_tol = 1e-10);

Mechanisms csbp_mechanisms(double lambda);
double u_lambda(double lambda, double s);
double csbp_imm_lt(double x, double s, double lambda);
double h_func(double a, double x);

double hitting_prob(double x, double y);
// lambda may be +infinity.
double exit_lt(double x, double r, double lambda);
// Mean of the eps-occupation approximation of the exit measure at r,
// restricted to trajectories with positive minimum, from x >= r + eps.
double exit_occupation_mean(double x, double r, double eps);

double g_mu(double mu, double x);
// 3 coth(z)^2 - 2 - 3/z^2, accurate for all z > 0.
double coth_defect(double z);
double big_G(double r, double mu, double nu);
double joint_hull_lt(const HullLawParams& p);
// Closed form of E[exp(-lambda Z_r - mu V0_r)].
double z_v0_lt(double r, double lambda, double mu);
double beta_density(double r, double t);
// CDF of beta_r, i.e. of the inverse of a Gamma(3/2, rate r^2/6) variable.
double beta_cdf(double r, double t);
double gamma_lt(double r, double nu);

double two_point_perimeter_lt(double t, double lambda1, double lambda2);
double cond_backward_lt(double s, double t, double z, double lambda);
double moments_ssmp(double x, double t, int p);

FPair appendix_F_f(double s, double a, double nu);
double tec_formu_value(double x, double y, double c);

}  // namespace hpl::analytic
