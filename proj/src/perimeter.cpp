#include "hpl/perimeter.hpp"

#include <algorithm>
#include <cmath>

#include "hpl/analytic.hpp"
#include "hpl/error.hpp"

namespace hpl::perimeter {

namespace {

const double kTwoOverSqrt3 = 2.0 / std::sqrt(3.0);

std::vector<double> default_grid(double horizon) {
  std::vector<double> g(100);
  for (int i = 0; i < 100; ++i) g[i] = horizon * (i + 1) / 100.0;
  return g;
}

// Values of x0 exp(xi_alpha(t)) at the sorted positive times obs.
std::vector<double> lamperti_values(double x0, const std::vector<double>& obs,
                                    const sampler::LevyXiStepper& st, const LampertiOptions& opt,
                                    RngStream& rng) {
  std::vector<double> out;
  out.reserve(obs.size());
  const double sx = std::sqrt(x0);
  const double hmax = opt.xi.step;
  double xi = 0, e0 = 1, t = 0, s = 0;
  std::size_t k = 0;
  while (k < obs.size()) {
    double h = std::min(hmax, opt.clock_step / (sx * e0));
    double xn = xi + st.increment(h, rng);
    double en = std::exp(0.5 * xn);
    double dt = sx * h * 0.5 * (e0 + en);
    while (k < obs.size() && t + dt >= obs[k]) {
      double f = (obs[k] - t) / dt;
      out.push_back(x0 * std::exp(xi + f * (xn - xi)));
      ++k;
    }
    t += dt;
    xi = xn;
    e0 = en;
    s += h;
    if (s > opt.max_xi_time) fail(ErrorKind::horizon, "simulate_lamperti: clock did not reach horizon");
  }
  return out;
}

void check_obs(const std::vector<double>& obs) {
  for (std::size_t i = 0; i < obs.size(); ++i) {
    require(obs[i] > 0, ErrorKind::domain, "perimeter: observation times must be > 0");
    require(i == 0 || obs[i] > obs[i - 1], ErrorKind::domain, "perimeter: observation times must increase");
  }
}

void check_options(const LampertiOptions& opt) {
  sampler::validate(opt.xi);
  require(opt.clock_step > 0 && opt.max_xi_time > 0, ErrorKind::config, "perimeter: bad clock controls");
}

double psi_gap(const sampler::LevyXiStepper& st) {
  return std::abs(st.psi_truncated(1.0) - analytic::psi_levy(1.0));
}

std::vector<double> from_zero_values(const std::vector<double>& t_obs, double t0,
                                     const sampler::LevyXiStepper& st, const LampertiOptions& opt,
                                     RngStream& rng) {
  double z0 = rng.gamma(1.0, 2.0 * t0 * t0 / 3.0);
  std::vector<double> rel(t_obs.size());
  for (std::size_t i = 0; i < t_obs.size(); ++i) rel[i] = t_obs[i] - t0;
  return lamperti_values(z0, rel, st, opt, rng);
}

void systematic_resample(std::vector<double>& y, std::vector<double>& w, RngStream& rng) {
  const std::size_t n = y.size();
  double total = 0;
  for (double v : w) total += v;
  const double mean = total / static_cast<double>(n);
  std::vector<double> ny(n);
  double u = rng.uniform() * total / static_cast<double>(n);
  double cum = w[0];
  std::size_t j = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double target = u + static_cast<double>(i) * total / static_cast<double>(n);
    while (cum < target && j + 1 < n) cum += w[++j];
    ny[i] = y[j];
  }
  y.swap(ny);
  std::fill(w.begin(), w.end(), mean);
}

double ess_of(const std::vector<double>& w) {
  double s = 0, s2 = 0;
  for (double v : w) {
    s += v;
    s2 += v * v;
  }
  if (!(s > 0) || !std::isfinite(s)) fail(ErrorKind::weight_collapse, "backward: weights collapsed");
  return s * s / s2;
}

}  // namespace

PerimeterPath simulate_lamperti(double x0, double horizon, const LampertiOptions& opt, RngStream& rng,
                                const std::vector<double>& obs) {
  require(x0 > 0, ErrorKind::domain, "simulate_lamperti: x0 must be > 0");
  require(horizon > 0, ErrorKind::domain, "simulate_lamperti: horizon must be > 0");
  check_options(opt);
  std::vector<double> grid = obs.empty() ? default_grid(horizon) : obs;
  check_obs(grid);
  sampler::LevyXiStepper st(opt.xi);
  PerimeterPath p;
  p.construction = Construction::lamperti;
  p.bias_budget = psi_gap(st);
  p.path.tag = "lamperti";
  p.path.times.push_back(0);
  p.path.values.push_back(x0);
  auto v = lamperti_values(x0, grid, st, opt, rng);
  p.path.times.insert(p.path.times.end(), grid.begin(), grid.end());
  p.path.values.insert(p.path.values.end(), v.begin(), v.end());
  return p;
}

PerimeterPath simulate_from_zero(const std::vector<double>& t_obs, double t0, const LampertiOptions& opt,
                                 RngStream& rng) {
  require(!t_obs.empty(), ErrorKind::domain, "simulate_from_zero: no observation times");
  check_obs(t_obs);
  require(t0 > 0 && t0 < t_obs.front(), ErrorKind::domain, "simulate_from_zero: need 0 < t0 < min(t_obs)");
  check_options(opt);
  sampler::LevyXiStepper st(opt.xi);
  PerimeterPath p;
  p.construction = Construction::lamperti;
  p.bias_budget = psi_gap(st);
  p.path.tag = "entrance";
  p.path.times.push_back(0);
  p.path.values.push_back(0);
  auto v = from_zero_values(t_obs, t0, st, opt, rng);
  p.path.times.insert(p.path.times.end(), t_obs.begin(), t_obs.end());
  p.path.values.insert(p.path.values.end(), v.begin(), v.end());
  return p;
}

std::vector<std::vector<double>> forward_marginals(const std::vector<double>& t_obs, double t0,
                                                   const LampertiOptions& opt, std::size_t n,
                                                   const McOptions& mc) {
  check_obs(t_obs);
  require(t0 > 0 && t0 < t_obs.front(), ErrorKind::domain, "forward_marginals: need 0 < t0 < min(t_obs)");
  check_options(opt);
  sampler::LevyXiStepper st(opt.xi);
  return parallel_map<std::vector<double>>(n, mc.workers, [&](std::size_t i) {
    RngStream rng(mc.seed, mc.stream_base + i);
    return from_zero_values(t_obs, t0, st, opt, rng);
  });
}

sampler::SamplePath simulate_csbp_immigration(double x0, double horizon, double step, RngStream& rng,
                                              bool immigration) {
  require(x0 >= 0, ErrorKind::domain, "simulate_csbp_immigration: x0 must be >= 0");
  require(horizon > 0, ErrorKind::domain, "simulate_csbp_immigration: horizon must be > 0");
  require(step > 0, ErrorKind::config, "simulate_csbp_immigration: step must be > 0");
  sampler::SamplePath p;
  p.tag = "csbp_immigration";
  p.times.push_back(0);
  p.values.push_back(x0);
  double y = x0, t = 0;
  while (t < horizon) {
    double dt = std::min(step, horizon - t);
    if (horizon - (t + dt) < 1e-12 * horizon) dt = horizon - t;
    double inc = 0;
    if (y > 0) inc += std::pow(y * dt * kTwoOverSqrt3, 2.0 / 3.0) * sampler::stable_increment(1.5, 1, 1, rng);
    if (immigration) {
      double c = dt * kTwoOverSqrt3;
      inc += c * c * sampler::stable_increment(0.5, 1, 1, rng);
    }
    y = std::max(0.0, y + inc);
    t += dt;
    p.times.push_back(t);
    p.values.push_back(y);
  }
  return p;
}

void validate(const BackwardHConfig& cfg) {
  require(cfg.t > 0, ErrorKind::config, "backward: t must be > 0");
  if (cfg.x_per_particle.empty()) {
    require(cfg.x >= 0, ErrorKind::config, "backward: x must be >= 0");
    require(cfg.n_particles >= 2, ErrorKind::config, "backward: need at least 2 particles");
  } else {
    require(cfg.x_per_particle.size() >= 2, ErrorKind::config, "backward: need at least 2 particles");
  }
  require(cfg.resample_threshold >= 0 && cfg.resample_threshold <= 1, ErrorKind::config,
          "backward: resample_threshold must be in [0, 1]");
}

WeightedEnsemble simulate_backward_htransform(const BackwardHConfig& cfg, double step, RngStream& rng,
                                              const std::vector<double>& obs_times) {
  validate(cfg);
  require(step > 0, ErrorKind::config, "backward: step must be > 0");
  for (std::size_t i = 0; i < obs_times.size(); ++i) {
    require(obs_times[i] >= 0 && obs_times[i] < cfg.t, ErrorKind::domain, "backward: obs times must be in [0, t)");
    require(i == 0 || obs_times[i] > obs_times[i - 1], ErrorKind::domain, "backward: obs times must increase");
  }
  std::vector<double> y = cfg.x_per_particle.empty() ? std::vector<double>(cfg.n_particles, cfg.x)
                                                     : cfg.x_per_particle;
  const std::size_t n = y.size();
  std::vector<double> w(n, 1.0);
  WeightedEnsemble out;
  out.obs_times = obs_times;
  double r = 0;
  std::size_t k = 0;
  auto record = [&] {
    out.values.push_back(y);
    out.weights.push_back(w);
    out.ess.push_back(ess_of(w));
  };
  while (k < obs_times.size() && obs_times[k] <= 0) {
    record();
    ++k;
  }
  while (k < obs_times.size()) {
    double dt = std::min(step, obs_times[k] - r);
    if (obs_times[k] - (r + dt) < 1e-12) dt = obs_times[k] - r;
    double a0 = cfg.t - r, a1 = cfg.t - r - dt;
    for (std::size_t i = 0; i < n; ++i) {
      double y0 = y[i];
      double inc = 0;
      if (y0 > 0)
        inc += std::pow(y0 * dt * kTwoOverSqrt3, 2.0 / 3.0) * sampler::stable_increment(1.5, 1, 1, rng);
      double c = dt * kTwoOverSqrt3;
      inc += c * c * sampler::stable_increment(0.5, 1, 1, rng);
      double y1 = std::max(0.0, y0 + inc);
      w[i] *= (a0 * a0) / (a1 * a1) * std::exp(-1.5 * (y1 / (a1 * a1) - y0 / (a0 * a0)));
      y[i] = y1;
    }
    r += dt;
    if (r >= obs_times[k]) {
      r = obs_times[k];
      record();
      ++k;
    }
    if (cfg.resample_threshold > 0 && ess_of(w) < cfg.resample_threshold * static_cast<double>(n)) {
      systematic_resample(y, w, rng);
      ++out.resamples;
    }
  }
  return out;
}

CrosscheckReport crosscheck_constructions(const CrosscheckConfig& cfg, const McOptions& mc) {
  require(!cfg.t_grid.empty(), ErrorKind::config, "crosscheck: empty t_grid");
  check_obs(cfg.t_grid);
  require(cfg.n >= 10, ErrorKind::config, "crosscheck: need n >= 10");
  CrosscheckReport rep;
  const double T = cfg.t_grid.back();
  // Forward observation times: the grid plus the two-point pair (1, 1 + t).
  std::vector<double> obs = cfg.t_grid;
  obs.push_back(1.0);
  obs.push_back(1.0 + cfg.two_point_t);
  std::sort(obs.begin(), obs.end());
  obs.erase(std::unique(obs.begin(), obs.end()), obs.end());
  auto idx = [&](double t) {
    return static_cast<std::size_t>(std::lower_bound(obs.begin(), obs.end(), t) - obs.begin());
  };
  auto rows = forward_marginals(obs, cfg.entrance_t0, cfg.lamperti, cfg.n, mc);

  for (double t : cfg.t_grid) {
    std::vector<double> col(cfg.n);
    for (std::size_t i = 0; i < cfg.n; ++i) col[i] = rows[i][idx(t)];
    rep.forward.push_back(col);
  }
  for (std::size_t i = 0; i < cfg.n; ++i) {
    double z1 = rows[i][idx(1.0)], z2 = rows[i][idx(1.0 + cfg.two_point_t)];
    rep.two_point.push_back(std::exp(-1.5 * (cfg.lambda1 * z1 + cfg.lambda2 * z2)));
  }

  RngStream brng(mc.seed, mc.stream_base + cfg.n + 1);
  BackwardHConfig bc;
  bc.t = T;
  bc.resample_threshold = cfg.resample_threshold;
  bc.x_per_particle.resize(cfg.n);
  for (auto& x : bc.x_per_particle) x = brng.gamma(1.0, 2.0 * T * T / 3.0);
  std::vector<double> rs;
  for (auto it = cfg.t_grid.rbegin(); it != cfg.t_grid.rend(); ++it) rs.push_back(T - *it);
  auto ens = simulate_backward_htransform(bc, cfg.csbp_step, brng, rs);
  for (std::size_t g = 0; g < cfg.t_grid.size(); ++g) {
    std::size_t e = cfg.t_grid.size() - 1 - g;
    rep.backward.push_back(ens.values[e]);
    rep.backward_w.push_back(ens.weights[e]);
  }

  for (std::size_t g = 0; g < cfg.t_grid.size(); ++g) {
    double t = cfg.t_grid[g];
    double mean = 2 * t * t / 3;
    auto ks = stats::ks_test(rep.forward[g], [mean](double z) { return z <= 0 ? 0.0 : -std::expm1(-z / mean); });
    auto c = stats::make_test("forward_vs_exact_ks_t=" + std::to_string(t), ks);
    c.digest = stats::digest(rep.forward[g]);
    rep.checks.push_back(c);
    auto ks2 = stats::ks_two_sample(rep.forward[g], rep.backward[g], {}, rep.backward_w[g]);
    auto c2 = stats::make_test("forward_vs_backward_ks_t=" + std::to_string(t), ks2);
    c2.digest = stats::digest(rep.backward[g]);
    rep.checks.push_back(c2);
  }
  auto m = stats::mean_se(rep.two_point);
  auto c = stats::make_check("two_point_lt", m.mean, m.stderr,
                             analytic::two_point_perimeter_lt(cfg.two_point_t, cfg.lambda1, cfg.lambda2),
                             cfg.two_point_budget);
  c.digest = stats::digest(rep.two_point);
  rep.checks.push_back(c);
  return rep;
}

}  // namespace hpl::perimeter
