#include "hpl/sampler.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "hpl/analytic.hpp"

namespace hpl::sampler {

namespace {

const double kPi = 3.14159265358979323846;
const double kJump = 1.0 / std::sqrt(6.0 * kPi);

double integrate(const std::function<double(double)>& f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 15, 1e-13);
}

// log(1 - u) + u
double log1m_plus(double u) {
  if (u < 1e-4) return -u * u * (0.5 + u * (1.0 / 3 + u * 0.25));
  return std::log1p(-u) + u;
}

// e^x - 1 - x - c x^2 / 2
double exp_remainder(double x, double c) {
  if (std::abs(x) < 0.5) {
    double term = x * x / 2, sum = (1 - c) * term;
    for (int k = 3; k < 20; ++k) {
      term *= x / k;
      sum += term;
    }
    return sum;
  }
  return std::expm1(x) - x - c * x * x / 2;
}

}  // namespace

void validate(const SamplePath& p) {
  require(p.times.size() == p.values.size(), ErrorKind::length_mismatch,
          "SamplePath: times and values differ in length");
  if (p.times.empty()) return;
  require(p.times.front() >= 0, ErrorKind::domain, "SamplePath: negative start time");
  for (std::size_t i = 1; i < p.times.size(); ++i)
    require(p.times[i] > p.times[i - 1], ErrorKind::domain, "SamplePath: times not increasing");
}

double bessel_sq_step(int dim, double x_sq, double dt, RngStream& rng) {
  require(dim >= 1, ErrorKind::domain, "bessel_sq_step: dim must be >= 1");
  double b = std::sqrt(x_sq) + std::sqrt(dt) * rng.normal();
  double chi = 0;
  int k = dim - 1;
  for (; k >= 2; k -= 2) chi += 2.0 * rng.exponential();
  if (k == 1) {
    double z = rng.normal();
    chi += z * z;
  }
  return b * b + dt * chi;
}

SamplePath bessel_path(double dim, double x0, const std::vector<double>& grid, RngStream& rng,
                       const BesselOptions& opt) {
  SamplePath p;
  p.times = grid;
  p.values.assign(grid.size(), 0.0);
  validate(p);
  p.times.clear();
  p.values.clear();
  if (dim == 5 || dim == 3) {
    require(x0 >= 0, ErrorKind::domain, "bessel_path: x0 must be >= 0");
    p.tag = dim == 5 ? "bessel5" : "bessel3";
    double t = 0, xs = x0 * x0;
    for (double g : grid) {
      if (g > t) xs = bessel_sq_step(static_cast<int>(dim), xs, g - t, rng);
      t = g;
      p.times.push_back(g);
      p.values.push_back(std::sqrt(xs));
    }
    return p;
  }
  require(dim == -1, ErrorKind::domain, "bessel_path: dim must be 5, 3 or -1");
  require(x0 > 0, ErrorKind::domain, "bessel_path: x0 must be > 0 for dim -1");
  require(opt.base_step > 0 && opt.small_factor > 0, ErrorKind::config,
          "bessel_path: step controls must be positive");
  p.tag = "bessel-1";
  const double b = opt.barrier;
  double t = 0, x = x0;
  for (double g : grid) {
    while (t < g) {
      if (x <= b) break;
      double dt = std::min({opt.base_step, opt.small_factor * x * x, g - t});
      double y = bessel_m1_step(x, dt, rng);
      double u = rng.uniform();
      if (b <= 0 && y <= 0) fail(ErrorKind::barrier_miss, "bessel_path: dim -1 path crossed zero");
      bool hit = b > 0 && (y <= b || u < std::exp(-2.0 * (x - b) * (y - b) / dt));
      if (hit) {
        double w = y <= b ? (x - b) / (x - y) : 0.5;
        t += w * dt;
        x = b;
        break;
      }
      t += dt;
      x = y;
      if (t > opt.max_time) fail(ErrorKind::horizon, "bessel_path: max_time exceeded");
    }
    if (x <= b && b > 0) {
      if (p.times.empty() || t > p.times.back()) {
        p.times.push_back(t);
        p.values.push_back(b);
      }
      return p;
    }
    p.times.push_back(g);
    p.values.push_back(x);
  }
  return p;
}

LastPassage last_passage_time(double r, double tol, RngStream& rng, const SpineOptions& opt) {
  require(r > 0, ErrorKind::domain, "last_passage_time: r must be > 0");
  require(tol > 0 && tol < 1, ErrorKind::domain, "last_passage_time: tol must be in (0, 1)");
  require(opt.kappa > 0, ErrorKind::config, "last_passage_time: kappa must be > 0");
  LastPassage out;
  out.level = r / std::sqrt(3.0);
  out.M = out.level * std::pow(tol, -1.0 / 3.0);
  out.path.tag = "bessel5";
  Bessel5Walker w(out.level, opt.kappa);
  LastPassageTracker lp(out.level);
  if (opt.record_path) {
    out.path.times.push_back(0);
    out.path.values.push_back(0);
  }
  while (w.R() <= out.M) {
    double t0 = w.t(), r0 = w.R();
    w.step(rng);
    lp.observe(t0, r0, w.t(), w.R(), rng);
    if (opt.record_path) {
      out.path.times.push_back(w.t());
      out.path.values.push_back(w.R());
    }
    if (w.t() > opt.max_time) fail(ErrorKind::horizon, "last_passage_time: level M not reached");
  }
  out.tau = lp.last();
  return out;
}

double gamma_sample(double shape, double scale, RngStream& rng) { return rng.gamma(shape, scale); }

double stable_laplace_constant(double alpha) {
  require(alpha > 0 && alpha <= 2 && alpha != 1, ErrorKind::domain,
          "stable_laplace_constant: alpha must be in (0, 2], alpha != 1");
  return 1.0 / std::abs(std::cos(kPi * alpha / 2));
}

double stable_increment(double alpha, double skew, double dt, RngStream& rng) {
  require(alpha > 0 && alpha <= 2, ErrorKind::domain, "stable_increment: alpha must be in (0, 2]");
  require(std::abs(skew) <= 1, ErrorKind::domain, "stable_increment: |skew| must be <= 1");
  require(dt > 0, ErrorKind::domain, "stable_increment: dt must be > 0");
  double v = kPi * (rng.uniform() - 0.5);
  double w = rng.exponential();
  if (alpha == 1) {
    double a = kPi / 2 + skew * v;
    double x = (2 / kPi) * (a * std::tan(v) - skew * std::log((kPi / 2) * w * std::cos(v) / a));
    return dt * x + (2 / kPi) * skew * dt * std::log(dt);
  }
  double t = skew * std::tan(kPi * alpha / 2);
  double b = std::atan(t) / alpha;
  double s = std::pow(1 + t * t, 1 / (2 * alpha));
  double x = s * std::sin(alpha * (v + b)) / std::pow(std::cos(v), 1 / alpha) *
             std::pow(std::cos(v - alpha * (v + b)) / w, (1 - alpha) / alpha);
  return std::pow(dt, 1 / alpha) * x;
}

void validate(const LevyXiConfig& cfg) {
  require(cfg.jump_cutoff_eps > 0 && cfg.jump_cutoff_eps < 1, ErrorKind::config,
          "LevyXiConfig: jump_cutoff_eps must be in (0, 1)");
  require(cfg.step > 0, ErrorKind::config, "LevyXiConfig: step must be > 0");
}

LevyXiStepper::LevyXiStepper(const LevyXiConfig& cfg) : cfg_(cfg) {
  validate(cfg);
  u_eps_ = -std::expm1(-cfg.jump_cutoff_eps);
  w_eps_ = std::pow(u_eps_, -1.5);
  double se = std::sqrt(u_eps_);
  // Proposals from the density 3 u^(-5/2), thinned by (3 - u) / 3.
  prop_rate_ = kJump * 2.0 * (w_eps_ - 1);
  rate_ = kJump * (2.0 * w_eps_ - 2.0 / se);
  double big_comp = kJump * (6.0 / se - 8.0 + 2.0 * se);
  // Small-jump integrals over u in (0, u_eps) after u = v^2.
  double small_comp = kJump * integrate(
                                  [](double v) {
                                    double u = v * v;
                                    return 2.0 * (log1m_plus(u) / (u * u)) * (3 - u);
                                  },
                                  0.0, se);
  double var = kJump * integrate(
                           [](double v) {
                             double u = v * v;
                             double l = u < 1e-8 ? -1 - u / 2 : std::log1p(-u) / u;
                             return 2.0 * l * l * (3 - u);
                           },
                           0.0, se);
  drift_ = 4.0 * std::sqrt(2.0 / (3.0 * kPi)) + big_comp + small_comp;
  sigma_ = cfg.small_jump_mode == SmallJumpMode::gaussian_correction ? std::sqrt(var) : 0.0;
}

double LevyXiStepper::increment(double dt, RngStream& rng) const {
  double x = drift_ * dt;
  if (sigma_ > 0) x += sigma_ * std::sqrt(dt) * rng.normal();
  std::uint64_t n = rng.poisson(prop_rate_ * dt);
  for (std::uint64_t i = 0; i < n; ++i) {
    double u = std::pow(w_eps_ - rng.uniform() * (w_eps_ - 1), -2.0 / 3.0);
    if (3.0 * rng.uniform() < 3.0 - u) x += std::log1p(-u);
  }
  return x;
}

double LevyXiStepper::psi_truncated(double q) const {
  require(q >= 0, ErrorKind::domain, "psi_truncated: q must be >= 0");
  double c = sigma_ > 0 ? 1.0 : 0.0;
  double omitted = kJump * integrate(
                               [q, c](double v) {
                                 double u = v * v;
                                 return 2.0 * exp_remainder(q * std::log1p(-u), c) / (u * u) *
                                        (3 - u);
                               },
                               0.0, std::sqrt(u_eps_));
  return analytic::psi_levy(q) - omitted;
}

double LevyXiStepper::bias_bound(double q, double t) const {
  return std::abs(std::exp(t * psi_truncated(q)) - std::exp(t * analytic::psi_levy(q)));
}

SamplePath levy_xi_path(double horizon, const LevyXiConfig& cfg, RngStream& rng) {
  require(horizon > 0, ErrorKind::domain, "levy_xi_path: horizon must be > 0");
  LevyXiStepper st(cfg);
  SamplePath p;
  p.tag = "levy_xi";
  p.times.push_back(0);
  p.values.push_back(0);
  double t = 0, x = 0;
  while (t < horizon) {
    double dt = std::min(cfg.step, horizon - t);
    if (horizon - (t + dt) < 1e-12 * horizon) dt = horizon - t;
    x += st.increment(dt, rng);
    t += dt;
    p.times.push_back(t);
    p.values.push_back(x);
  }
  return p;
}

std::vector<double> poisson_points(const std::function<double(double)>& intensity, double bound,
                                   double t0, double t1, RngStream& rng) {
  require(bound > 0, ErrorKind::domain, "poisson_points: bound must be > 0");
  require(t1 >= t0, ErrorKind::domain, "poisson_points: empty interval");
  std::vector<double> pts;
  double t = t0;
  while (true) {
    t += rng.exponential() / bound;
    if (t >= t1) break;
    double lam = intensity(t);
    if (lam > bound * (1 + 1e-12))
      fail(ErrorKind::bound_violation, "poisson_points: intensity exceeds bound");
    if (rng.uniform() * bound < lam) pts.push_back(t);
  }
  return pts;
}

}  // namespace hpl::sampler
