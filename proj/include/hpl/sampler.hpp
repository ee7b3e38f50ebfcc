#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "hpl/error.hpp"
#include "hpl/rng.hpp"

namespace hpl::sampler {

struct SamplePath {
  std::vector<double> times;
  std::vector<double> values;
  std::string tag;
};

// Throws if times are not strictly increasing, start below 0, or lengths differ.
void validate(const SamplePath& p);

// Exact transition of the squared Bessel process of integer dimension dim >= 1.
double bessel_sq_step(int dim, double x_sq, double dt, RngStream& rng);

struct BesselOptions {
  // Only used for dim = -1: the path stops at the first passage below barrier.
  double barrier = 0;
  double base_step = 1e-3;
  double small_factor = 1e-2;
  double max_time = 1e6;
};

// dim 5 and 3 are exact on the grid. dim -1 runs Euler steps
// dt = min(base_step, small_factor * X^2) and stops at the barrier.
SamplePath bessel_path(double dim, double x0, const std::vector<double>& grid, RngStream& rng,
                       const BesselOptions& opt = {});

// One Euler step of dX = dB - dt / X. Returns the new value.
inline double bessel_m1_step(double x, double dt, RngStream& rng) {
  return x - dt / x + std::sqrt(dt) * rng.normal();
}

// Bessel(5) with steps dt = kappa * max(R, a)^2, where a is the level of interest.
class Bessel5Walker {
 public:
  Bessel5Walker(double a, double kappa, double r0 = 0) : a_(a), kappa_(kappa), r_(r0) {}
  void step(RngStream& rng) {
    double m = std::max(r_, a_);
    double dt = kappa_ * m * m;
    r_ = std::sqrt(bessel_sq_step(5, r_ * r_, dt, rng));
    t_ += dt;
  }
  double t() const { return t_; }
  double R() const { return r_; }

 private:
  double a_, kappa_;
  double t_ = 0, r_;
};

// Tracks the last time a discretely observed path was at or below level a.
// Between two observations above a, a Brownian-bridge excursion below a is
// drawn with probability exp(-2 (R0 - a)(R1 - a) / dt); one uniform is
// consumed per observed step either way.
class LastPassageTracker {
 public:
  explicit LastPassageTracker(double a) : a_(a) {}
  // Returns true when [t0, t1] contains a visit below a.
  bool observe(double t0, double r0, double t1, double r1, RngStream& rng) {
    double u = rng.uniform();
    double dt = t1 - t0;
    if (r1 <= a_) {
      last_ = t1;
      return true;
    }
    if (r0 <= a_) {
      last_ = t0 + dt * (a_ - r0) / (r1 - r0);
      return true;
    }
    double p = std::exp(-2.0 * (r0 - a_) * (r1 - a_) / dt);
    if (u < p) {
      last_ = t0 + dt * (r0 - a_) / ((r0 - a_) + (r1 - a_));
      return true;
    }
    return false;
  }
  double last() const { return last_; }

 private:
  double a_;
  double last_ = 0;
};

struct SpineOptions {
  double kappa = 1e-3;
  double max_time = 1e9;
  bool record_path = true;
};

struct LastPassage {
  double tau;
  double level;  // r / sqrt(3)
  double M;      // stopping level
  SamplePath path;
};

// Last passage of Bessel(5) from 0 at r / sqrt(3); the path stops above
// M = (r / sqrt(3)) tol^(-1/3).
LastPassage last_passage_time(double r, double tol, RngStream& rng, const SpineOptions& opt = {});

double gamma_sample(double shape, double scale, RngStream& rng);

// Standard alpha-stable increment over dt (Chambers-Mallows-Stuck). With
// skew = 1 and alpha != 1, E[exp(-l X)] = exp(-dt l^alpha / cos(pi alpha / 2)).
double stable_increment(double alpha, double skew, double dt, RngStream& rng);
// 1 / |cos(pi alpha / 2)|
double stable_laplace_constant(double alpha);

enum class SmallJumpMode { compensating_drift, gaussian_correction };

struct LevyXiConfig {
  double jump_cutoff_eps = 1e-3;
  SmallJumpMode small_jump_mode = SmallJumpMode::gaussian_correction;
  double step = 1e-3;
};

void validate(const LevyXiConfig& cfg);

// Increments of the approximate Levy process for a fixed configuration.
class LevyXiStepper {
 public:
  explicit LevyXiStepper(const LevyXiConfig& cfg);
  double increment(double dt, RngStream& rng) const;
  // Laplace exponent of the simulated (truncated) process.
  double psi_truncated(double q) const;
  // |exp(t psi_truncated(q)) - exp(t psi(q))|
  double bias_bound(double q, double t) const;
  double drift() const { return drift_; }
  double sigma() const { return sigma_; }
  double jump_rate() const { return rate_; }
  const LevyXiConfig& config() const { return cfg_; }

 private:
  LevyXiConfig cfg_;
  double u_eps_, w_eps_;  // cutoff in u = 1 - e^y, and u_eps^(-3/2)
  double prop_rate_, rate_, drift_, sigma_;
};

SamplePath levy_xi_path(double horizon, const LevyXiConfig& cfg, RngStream& rng);

// Inhomogeneous Poisson points on [t0, t1) by thinning against bound.
std::vector<double> poisson_points(const std::function<double(double)>& intensity, double bound,
                                   double t0, double t1, RngStream& rng);

}  // namespace hpl::sampler
