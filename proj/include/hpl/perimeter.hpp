#pragma once

#include <string>
#include <vector>

#include "hpl/parallel.hpp"
#include "hpl/rng.hpp"
#include "hpl/sampler.hpp"
#include "hpl/stats.hpp"

namespace hpl::perimeter {

enum class Construction { lamperti, backward_h, exact_marginal };

struct PerimeterPath {
  sampler::SamplePath path;
  Construction construction = Construction::lamperti;
  // |psi_truncated(1) - psi(1)| of the Levy approximation.
  double bias_budget = 0;
};

struct LampertiOptions {
  sampler::LevyXiConfig xi;
  double clock_step = 1e-3;     // largest clock increment per xi step
  double max_xi_time = 1e4;
};

// x0 exp(xi_alpha(t)) observed at the times obs (sorted, > 0). With obs empty a
// uniform grid of 100 points on (0, horizon] is used. Time 0 is always included.
PerimeterPath simulate_lamperti(double x0, double horizon, const LampertiOptions& opt, RngStream& rng,
                                const std::vector<double>& obs = {});
// Entrance law at t0, then the Lamperti continuation.
PerimeterPath simulate_from_zero(const std::vector<double>& t_obs, double t0, const LampertiOptions& opt,
                                 RngStream& rng);

// Euler clock: Y_{k+1} = Y_k + X(Y_k dt) + S(dt), floored at 0.
sampler::SamplePath simulate_csbp_immigration(double x0, double horizon, double step, RngStream& rng,
                                              bool immigration = true);

struct BackwardHConfig {
  double t = 1;
  double x = 1;
  std::size_t n_particles = 1000;
  double resample_threshold = 0.5;
  // Per-particle starting values; when set, overrides x and n_particles.
  std::vector<double> x_per_particle;
};

void validate(const BackwardHConfig& cfg);

struct WeightedEnsemble {
  std::vector<double> obs_times;               // r values
  std::vector<std::vector<double>> values;     // [obs][particle]
  std::vector<std::vector<double>> weights;    // [obs][particle]
  std::vector<double> ess;                     // effective sample size at each obs
  std::size_t resamples = 0;
};

// Particles follow the CSBP with immigration from x and carry the weight
// h_{t-r}(Y_r) / h_t(x). Systematic resampling when ESS / n < threshold.
WeightedEnsemble simulate_backward_htransform(const BackwardHConfig& cfg, double step, RngStream& rng,
                                              const std::vector<double>& obs_times);

struct CrosscheckConfig {
  std::vector<double> t_grid{0.5, 1.0};
  std::size_t n = 10000;
  double entrance_t0 = 0.005;
  LampertiOptions lamperti;
  double csbp_step = 1e-3;
  double resample_threshold = 0.5;
  double two_point_t = 1;
  double lambda1 = 0, lambda2 = 1;
  double two_point_budget = 2e-3;
};

struct CrosscheckReport {
  std::vector<stats::Check> checks;
  std::vector<std::vector<double>> forward;   // [t index][replicate]
  std::vector<std::vector<double>> backward;  // [t index][particle]
  std::vector<std::vector<double>> backward_w;
  std::vector<double> two_point;              // per replicate exp(-(3/2)(l1 Z_1 + l2 Z_{1+t}))
};

CrosscheckReport crosscheck_constructions(const CrosscheckConfig& cfg, const McOptions& mc);

// Forward entrance-law paths observed at t_obs, one row per replicate.
std::vector<std::vector<double>> forward_marginals(const std::vector<double>& t_obs, double t0,
                                                   const LampertiOptions& opt, std::size_t n,
                                                   const McOptions& mc);

}  // namespace hpl::perimeter
