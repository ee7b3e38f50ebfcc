#pragma once

#include <optional>
#include <vector>

#include "hpl/parallel.hpp"
#include "hpl/rng.hpp"
#include "hpl/snake.hpp"

namespace hpl::hull {

struct HullSample {
  double beta = 0, gamma = 0;
  double z_left = 0, z_right = 0, z = 0;
  bool has_volume = false;
  double v0 = 0, v1 = 0, v2 = 0, v = 0;
};

void validate(const HullSample& h);

HullSample sample_hull_exact(double r, RngStream& rng);

struct ConstructiveHullConfig {
  double r = 1;
  double spine_tol = 1e-4;
  double spine_kappa = 1e-3;       // spine step kappa * max(R, r / sqrt 3)^2
  snake::SnakeSampleConfig snake_cfg = snake::counting_config();
  // Excursions below r are counted when they reach r - exit_depth.
  double exit_depth = 0.5;
  // Outer snakes lower than height_factor * (x - r + exit_depth)^2 are not grown.
  double height_factor = 0.02;
  // Inner snakes (volume only) lower than inner_height contribute their mean duration.
  double inner_height = 0.01;
  bool snakes = true;
  bool volumes = false;
  // Adds the mean exit measure carried by the spine beyond its stopping level.
  bool tail_compensation = true;
};

void validate(const ConstructiveHullConfig& cfg);

struct ConstructiveDiagnostics {
  std::size_t outer_trees = 0;
  std::size_t nodes = 0;
  double tail_mean = 0;  // compensated exit measure per side
};

HullSample sample_hull_constructive(const ConstructiveHullConfig& cfg, RngStream& rng,
                                    ConstructiveDiagnostics* diag = nullptr);

struct Estimate {
  double estimate;
  double stderr;
};

struct FkOptions {
  double spine_tol = 1e-4;
  double spine_kappa = 1e-3;
};

// E[exp(-nu gamma_r - 2 int_0^gamma_r g_mu(sqrt3 R_t) dt)] over n Bessel(5) paths.
Estimate fk_gamma_volume_lt(double r, double mu, double nu, std::size_t n, const McOptions& mc,
                            const FkOptions& opt = {});
// Per-path values of the same functional for several (mu, nu) pairs on shared paths.
std::vector<double> fk_gamma_volume_path(double r, const std::vector<std::pair<double, double>>& args,
                                         RngStream& rng, const FkOptions& opt = {});

struct TecOptions {
  double base_step = 2e-4;
  double small_factor = 1e-2;
};

// Bessel(-1) from y until it hits x, averaging exp(-int ((X - c)^-2 - X^-2) dt).
Estimate fk_tec_formu(double x, double y, double c, std::size_t n, const McOptions& mc,
                      const TecOptions& opt = {});
double fk_tec_path(double x, double y, double c, RngStream& rng, const TecOptions& opt = {});

struct JointReport {
  double zv0_closed;            // E[exp(-lambda Z - mu V0)] in closed form
  Estimate zv0_mc;              // Z ~ Exp(mean 2r^2/3) weighted by exp(-(lambda + g_mu(r)) Z)
  Estimate beta_factor;         // (beta, V1)
  Estimate gamma_factor;        // (gamma, V2)
  Estimate product;             // closed Z/V0 factor times the two Feynman-Kac factors
  double oracle;
};

JointReport verify_joint_lt(double r, double lambda, double nu1, double nu2, double mu,
                            std::size_t n, const McOptions& mc, const FkOptions& opt = {});

}  // namespace hpl::hull
