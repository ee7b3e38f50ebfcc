#include "hpl/hull.hpp"

#include <algorithm>
#include <cmath>

#include "hpl/analytic.hpp"
#include "hpl/error.hpp"
#include "hpl/sampler.hpp"

namespace hpl::hull {

namespace {

const double kSqrt3 = std::sqrt(3.0);

struct SideResult {
  double last = 0;
  double z = 0, v_outer = 0, v_inner = 0;
};

Estimate mean_of(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  double n = static_cast<double>(v.size());
  return {m, n > 1 ? std::sqrt(ss / (n - 1) / n) : 0.0};
}

SideResult run_side(const ConstructiveHullConfig& cfg, RngStream& spine_rng, RngStream& snake_rng,
                    ConstructiveDiagnostics* diag) {
  const double a = cfg.r / kSqrt3;
  const double M = a * std::pow(cfg.spine_tol, -1.0 / 3.0);
  sampler::Bessel5Walker w(a, cfg.spine_kappa);
  sampler::LastPassageTracker lp(a);
  std::vector<double> ts{0}, rs{0};
  while (w.R() <= M) {
    double t0 = w.t(), r0 = w.R();
    w.step(spine_rng);
    lp.observe(t0, r0, w.t(), w.R(), spine_rng);
    ts.push_back(w.t());
    rs.push_back(w.R());
  }
  SideResult out;
  out.last = lp.last();
  if (!cfg.snakes) return out;
  const double r = cfg.r;
  for (std::size_t k = 1; k < ts.size(); ++k) {
    double t0 = ts[k - 1], t1 = ts[k];
    double x = kSqrt3 * 0.5 * (rs[k - 1] + rs[k]);
    if (cfg.volumes && t0 < out.last) {
      double dt = std::min(t1, out.last) - t0;
      double eta = cfg.inner_height;
      out.v_inner += (2.0 / 3.0) * eta * dt;
      std::uint64_t n = snake_rng.poisson(dt / eta);
      for (std::uint64_t i = 0; i < n; ++i) {
        double h = snake::sample_height(eta, snake_rng);
        out.v_inner += snake::positive_mass_tree(x, h, cfg.snake_cfg, snake_rng);
      }
    }
    if (t1 <= out.last || x <= r) continue;
    double dt = t1 - std::max(t0, out.last);
    double d = x - r + cfg.exit_depth;
    double eh = cfg.height_factor * d * d;
    std::uint64_t n = snake_rng.poisson(dt / eh);
    for (std::uint64_t i = 0; i < n; ++i) {
      double h = snake::sample_height(eh, snake_rng);
      snake::ExitCount e = snake::exit_count_tree(x, h, r, cfg.exit_depth, cfg.snake_cfg, snake_rng);
      out.z += e.z;
      out.v_outer += e.v_below;
      if (diag) {
        ++diag->outer_trees;
        diag->nodes += e.nodes;
      }
    }
  }
  if (cfg.tail_compensation) {
    double tail = 2.0 * a * a * a / M;
    out.z += tail;
    if (diag) diag->tail_mean = tail;
  }
  return out;
}

}  // namespace

void validate(const HullSample& h) {
  require(h.beta >= 0 && h.gamma >= 0 && h.z_left >= 0 && h.z_right >= 0, ErrorKind::domain,
          "HullSample: negative field");
  require(h.z == h.z_left + h.z_right, ErrorKind::numerical, "HullSample: z != z_left + z_right");
  if (h.has_volume)
    require(std::abs(h.v - (h.v0 + h.v1 + h.v2)) <= 1e-12 * std::max(1.0, h.v), ErrorKind::numerical,
            "HullSample: v != v0 + v1 + v2");
}

HullSample sample_hull_exact(double r, RngStream& rng) {
  require(r > 0, ErrorKind::domain, "sample_hull_exact: r must be > 0");
  HullSample h;
  h.beta = 1.0 / rng.gamma(1.5, 6.0 / (r * r));
  h.gamma = 1.0 / rng.gamma(1.5, 6.0 / (r * r));
  h.z_left = rng.gamma(0.5, 2.0 * r * r / 3.0);
  h.z_right = rng.gamma(0.5, 2.0 * r * r / 3.0);
  h.z = h.z_left + h.z_right;
  return h;
}

void validate(const ConstructiveHullConfig& cfg) {
  require(cfg.r > 0, ErrorKind::config, "hull: r must be > 0");
  require(cfg.spine_tol > 0 && cfg.spine_tol < 1, ErrorKind::config, "hull: spine_tol must be in (0, 1)");
  require(cfg.spine_kappa > 0, ErrorKind::config, "hull: spine_kappa must be > 0");
  require(cfg.exit_depth > 0 && cfg.exit_depth < cfg.r, ErrorKind::config,
          "hull: exit_depth must be in (0, r)");
  require(cfg.height_factor > 0 && cfg.inner_height > 0, ErrorKind::config,
          "hull: height controls must be > 0");
  snake::validate(cfg.snake_cfg);
}

HullSample sample_hull_constructive(const ConstructiveHullConfig& cfg, RngStream& rng,
                                    ConstructiveDiagnostics* diag) {
  validate(cfg);
  RngStream spine_l = rng.substream(1), spine_r = rng.substream(2);
  RngStream snake_l = rng.substream(3), snake_r = rng.substream(4);
  SideResult left = run_side(cfg, spine_l, snake_l, diag);
  SideResult right = run_side(cfg, spine_r, snake_r, diag);
  HullSample h;
  h.beta = left.last;
  h.gamma = right.last;
  h.z_left = left.z;
  h.z_right = right.z;
  h.z = h.z_left + h.z_right;
  if (cfg.volumes) {
    h.has_volume = true;
    h.v0 = left.v_outer + right.v_outer;
    h.v1 = left.v_inner;
    h.v2 = right.v_inner;
    h.v = h.v0 + h.v1 + h.v2;
  }
  return h;
}

std::vector<double> fk_gamma_volume_path(double r, const std::vector<std::pair<double, double>>& args,
                                         RngStream& rng, const FkOptions& opt) {
  require(r > 0, ErrorKind::domain, "fk_gamma_volume: r must be > 0");
  for (auto [mu, nu] : args)
    require(mu >= 0 && nu >= 0, ErrorKind::domain, "fk_gamma_volume: mu, nu must be >= 0");
  std::vector<double> mus;
  for (auto [mu, nu] : args)
    if (std::find(mus.begin(), mus.end(), mu) == mus.end()) mus.push_back(mu);
  const std::size_t m = mus.size();
  auto g = [&](std::size_t j, double R) {
    if (mus[j] == 0 || R <= 0) return 0.0;
    return analytic::g_mu(mus[j], kSqrt3 * R);
  };
  const double a = r / kSqrt3;
  const double M = a * std::pow(opt.spine_tol, -1.0 / 3.0);
  sampler::Bessel5Walker w(a, opt.spine_kappa);
  sampler::LastPassageTracker lp(a);
  // g_mu vanishes at the origin.
  std::vector<double> cum(m, 0.0), gprev(m, 0.0), gnext(m), at_last(m, 0.0);
  double last = 0;
  while (w.R() <= M) {
    double t0 = w.t(), r0 = w.R();
    w.step(rng);
    double dt = w.t() - t0;
    for (std::size_t j = 0; j < m; ++j) gnext[j] = g(j, w.R());
    if (lp.observe(t0, r0, w.t(), w.R(), rng)) {
      last = lp.last();
      double f = (last - t0) / dt;
      for (std::size_t j = 0; j < m; ++j) {
        double gl = gprev[j] + f * (gnext[j] - gprev[j]);
        at_last[j] = cum[j] + 0.5 * (gprev[j] + gl) * (last - t0);
      }
    }
    for (std::size_t j = 0; j < m; ++j) {
      cum[j] += 0.5 * (gprev[j] + gnext[j]) * dt;
      gprev[j] = gnext[j];
    }
  }
  std::vector<double> out;
  for (auto [mu, nu] : args) {
    std::size_t j = static_cast<std::size_t>(std::find(mus.begin(), mus.end(), mu) - mus.begin());
    out.push_back(std::exp(-nu * last - 2.0 * at_last[j]));
  }
  return out;
}

Estimate fk_gamma_volume_lt(double r, double mu, double nu, std::size_t n, const McOptions& mc,
                            const FkOptions& opt) {
  require(n >= 2, ErrorKind::domain, "fk_gamma_volume_lt: need n >= 2");
  auto v = parallel_map<double>(n, mc.workers, [&](std::size_t i) {
    RngStream rng(mc.seed, mc.stream_base + i);
    return fk_gamma_volume_path(r, {{mu, nu}}, rng, opt)[0];
  });
  return mean_of(v);
}

double fk_tec_path(double x, double y, double c, RngStream& rng, const TecOptions& opt) {
  require(0 < c && c < x && x < y, ErrorKind::domain, "fk_tec_formu: need 0 < c < x < y");
  auto f = [c](double X) { return 1.0 / ((X - c) * (X - c)) - 1.0 / (X * X); };
  double X = y, integral = 0;
  while (true) {
    double dt = std::min(opt.base_step, opt.small_factor * X * X);
    double Y = sampler::bessel_m1_step(X, dt, rng);
    double u = rng.uniform();
    bool hit = Y <= x || u < std::exp(-2.0 * (X - x) * (Y - x) / dt);
    if (hit) {
      double wgt = Y <= x ? (X - x) / (X - Y) : 0.5;
      integral += 0.5 * (f(X) + f(x)) * wgt * dt;
      break;
    }
    integral += 0.5 * (f(X) + f(Y)) * dt;
    X = Y;
  }
  return std::exp(-integral);
}

Estimate fk_tec_formu(double x, double y, double c, std::size_t n, const McOptions& mc,
                      const TecOptions& opt) {
  require(n >= 2, ErrorKind::domain, "fk_tec_formu: need n >= 2");
  require(opt.base_step > 0 && opt.small_factor > 0, ErrorKind::config, "fk_tec_formu: bad steps");
  auto v = parallel_map<double>(n, mc.workers, [&](std::size_t i) {
    RngStream rng(mc.seed, mc.stream_base + i);
    return fk_tec_path(x, y, c, rng, opt);
  });
  return mean_of(v);
}

JointReport verify_joint_lt(double r, double lambda, double nu1, double nu2, double mu,
                            std::size_t n, const McOptions& mc, const FkOptions& opt) {
  require(r > 0 && lambda >= 0 && nu1 >= 0 && nu2 >= 0 && mu >= 0, ErrorKind::domain,
          "verify_joint_lt: bad arguments");
  JointReport rep;
  rep.zv0_closed = analytic::z_v0_lt(r, lambda, mu);
  double g = mu > 0 ? analytic::g_mu(mu, r) : 0.0;
  auto zw = parallel_map<double>(n, mc.workers, [&](std::size_t i) {
    RngStream rng(mc.seed, mc.stream_base + 2 * n + i);
    double z = rng.gamma(1.0, 2.0 * r * r / 3.0);
    return std::exp(-(lambda + g) * z);
  });
  rep.zv0_mc = mean_of(zw);
  McOptions m1 = mc, m2 = mc;
  m2.stream_base = mc.stream_base + n;
  rep.beta_factor = fk_gamma_volume_lt(r, mu, nu1, n, m1, opt);
  rep.gamma_factor = fk_gamma_volume_lt(r, mu, nu2, n, m2, opt);
  double p = rep.zv0_closed * rep.beta_factor.estimate * rep.gamma_factor.estimate;
  double rel1 = rep.beta_factor.stderr / rep.beta_factor.estimate;
  double rel2 = rep.gamma_factor.stderr / rep.gamma_factor.estimate;
  rep.product = {p, p * std::sqrt(rel1 * rel1 + rel2 * rel2)};
  rep.oracle = analytic::joint_hull_lt({r, lambda, nu1, nu2, mu});
  return rep;
}

}  // namespace hpl::hull
