#include "hpl/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "hpl/analytic.hpp"
#include "hpl/error.hpp"
#include "hpl/hull.hpp"
#include "hpl/parallel.hpp"
#include "hpl/perimeter.hpp"
#include "hpl/sampler.hpp"
#include "hpl/snake.hpp"

#ifndef HPL_CODE_VERSION
#define HPL_CODE_VERSION "unknown"
#endif

namespace hpl::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using stats::Check;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Bias budgets of the Monte Carlo checks.
constexpr double kLkBudget = 1e-6;
constexpr double kFkBudget = 1e-3;          // last-passage tolerance and spine step
constexpr double kTecBudget = 1e-3;         // Euler step of the Bessel(-1) path
constexpr double kHittingBudget = 5e-3;     // tree resolution
constexpr double kExitBudget = 5e-3;        // tree resolution
constexpr double kCsbpBudget = 5e-3;        // Euler clock step
constexpr double kTwoPointBudget = 2e-3;    // Levy truncation and entrance time
constexpr double kMomentBudget = 1e-2;      // Levy truncation and entrance time
constexpr double kBackwardBudget = 5e-3;    // CSBP step
constexpr double kConstructiveRel = 0.10;   // relative tolerance of the constructive mean

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    fail(ErrorKind::config, "parameter " + key + ": not a number: " + v);
  }
}

Check tagged(Check c, const std::vector<double>& sample) {
  c.digest = stats::digest(sample);
  return c;
}

std::function<double(double)> exp_cdf(double mean) {
  return [mean](double z) { return z <= 0 ? 0.0 : -std::expm1(-z / mean); };
}

std::vector<double> column(const std::vector<hull::HullSample>& h, double hull::HullSample::*f,
                           double scale = 1) {
  std::vector<double> out(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) out[i] = h[i].*f * scale;
  return out;
}

Table hull_table(const std::vector<hull::HullSample>& hs) {
  Table t;
  t.columns = {"beta", "gamma", "z_left", "z_right", "z"};
  bool vol = !hs.empty() && hs[0].has_volume;
  if (vol) t.columns.insert(t.columns.end(), {"v0", "v1", "v2", "v"});
  for (const auto& h : hs) {
    std::vector<double> row{h.beta, h.gamma, h.z_left, h.z_right, h.z};
    if (vol) row.insert(row.end(), {h.v0, h.v1, h.v2, h.v});
    t.rows.push_back(std::move(row));
  }
  return t;
}

void independence_checks(ExperimentResult& out, const std::vector<hull::HullSample>& hs,
                         std::size_t limit, std::uint64_t seed, int permutations) {
  std::size_t n = std::min(limit, hs.size());
  std::vector<hull::HullSample> sub(hs.begin(), hs.begin() + static_cast<std::ptrdiff_t>(n));
  std::vector<std::vector<double>> cols{column(sub, &hull::HullSample::beta),
                                        column(sub, &hull::HullSample::gamma),
                                        column(sub, &hull::HullSample::z)};
  const char* names[] = {"beta", "gamma", "z"};
  auto tests = stats::independence_test(cols, RngStream(seed, 0xD1CE), permutations);
  for (const auto& t : tests) {
    Check c = stats::make_test(std::string("independence_") + names[t.i] + "_" + names[t.j],
                               {t.dcor, t.p_value});
    out.checks.push_back(tagged(c, cols[t.i]));
  }
}

void scale_checks(ExperimentResult& out, const std::vector<hull::HullSample>& base,
                  const std::vector<hull::HullSample>& scaled, double c2, const std::string& prefix) {
  double s = 1.0 / c2;
  for (auto [name, f] : {std::pair{"beta", &hull::HullSample::beta}, std::pair{"gamma", &hull::HullSample::gamma},
                         std::pair{"z", &hull::HullSample::z}}) {
    auto a = column(base, f), b = column(scaled, f, s);
    out.checks.push_back(tagged(stats::make_test(prefix + name + "_ks2", stats::ks_two_sample(a, b)), b));
  }
}

std::vector<hull::HullSample> exact_samples(double r, std::size_t n, const McOptions& mc) {
  return parallel_map<hull::HullSample>(n, mc.workers, [&](std::size_t i) {
    RngStream rng(mc.seed, mc.stream_base + i);
    return hull::sample_hull_exact(r, rng);
  });
}

// ---------------------------------------------------------------- eval

ExperimentResult eval(const ExperimentConfig& cfg, ParamReader& p) {
  ExperimentResult out;
  std::string f = p.str("formula", "psi");
  auto value = [&](const std::string& name, double v) {
    // Closed forms without a second route are reported against themselves.
    out.checks.push_back(stats::make_check(name, v, 0, v, 0));
  };
  if (f == "psi") {
    double q = p.num("q", 1);
    double tol = p.num("quad_tol", 1e-10);
    out.checks.push_back(stats::make_check("psi(q=" + fmt(q) + ")", analytic::psi_levy(q), 0,
                                           analytic::psi_levy_lk(q, tol), kLkBudget, 0));
  } else if (f == "csbp_mechanisms") {
    double l = p.num("lambda", 1);
    auto m = analytic::csbp_mechanisms(l);
    value("Psi(lambda=" + fmt(l) + ")", m.Psi);
    value("H(lambda=" + fmt(l) + ")", m.H);
  } else if (f == "u_lambda") {
    double l = p.num("lambda", 1), s = p.num("s", 1);
    value("u(lambda=" + fmt(l) + ",s=" + fmt(s) + ")", analytic::u_lambda(l, s));
  } else if (f == "csbp_imm_lt") {
    double x = p.num("x", 0), s = p.num("s", 1), l = p.num("lambda", 1.5);
    value("csbp_imm_lt(x=" + fmt(x) + ",s=" + fmt(s) + ",lambda=" + fmt(l) + ")",
          analytic::csbp_imm_lt(x, s, l));
  } else if (f == "h_func") {
    double a = p.num("a", 1), x = p.num("x", 1);
    value("h(a=" + fmt(a) + ",x=" + fmt(x) + ")", analytic::h_func(a, x));
  } else if (f == "hitting_prob") {
    double x = p.num("x", 1), y = p.num("y", -1);
    value("hitting_prob(x=" + fmt(x) + ",y=" + fmt(y) + ")", analytic::hitting_prob(x, y));
  } else if (f == "exit_lt") {
    double x = p.num("x", 2), r = p.num("r", 1), l = p.num("lambda", 1);
    value("exit_lt(x=" + fmt(x) + ",r=" + fmt(r) + ",lambda=" + fmt(l) + ")", analytic::exit_lt(x, r, l));
  } else if (f == "g_mu") {
    double mu = p.num("mu", 1), x = p.num("x", 1);
    value("g_mu(mu=" + fmt(mu) + ",x=" + fmt(x) + ")", analytic::g_mu(mu, x));
  } else if (f == "big_G") {
    double r = p.num("r", 1), mu = p.num("mu", 1), nu = p.num("nu", 1);
    value("G(r=" + fmt(r) + ",mu=" + fmt(mu) + ",nu=" + fmt(nu) + ")", analytic::big_G(r, mu, nu));
  } else if (f == "joint_hull_lt") {
    analytic::HullLawParams h{p.num("r", 1), p.num("lambda", 1), p.num("nu1", 1), p.num("nu2", 1),
                              p.num("mu", 1)};
    // Factorized route: Z/V0 factor times the two swallowed-side factors.
    double fac = analytic::z_v0_lt(h.r, h.lambda, h.mu) * analytic::big_G(h.r, h.mu, h.nu1) *
                 analytic::big_G(h.r, h.mu, h.nu2);
    out.checks.push_back(stats::make_check("joint_hull_lt", analytic::joint_hull_lt(h), 0, fac, 1e-12, 0));
  } else if (f == "beta_density") {
    double r = p.num("r", 1), t = p.num("t", 1);
    double d = analytic::beta_density(r, t);
    double h = 1e-5 * t;
    double num = (analytic::beta_cdf(r, t + h) - analytic::beta_cdf(r, t - h)) / (2 * h);
    out.checks.push_back(stats::make_check("beta_density(r=" + fmt(r) + ",t=" + fmt(t) + ")", d, 0, num,
                                           1e-6 * std::max(1.0, d), 0));
  } else if (f == "gamma_lt") {
    double r = p.num("r", 1), nu = p.num("nu", 1.5);
    out.checks.push_back(stats::make_check("gamma_lt(r=" + fmt(r) + ",nu=" + fmt(nu) + ")",
                                           analytic::gamma_lt(r, nu), 0, analytic::big_G(r, 0, nu), 1e-9, 0));
  } else if (f == "two_point") {
    double t = p.num("t", 1), l1 = p.num("lambda1", 0), l2 = p.num("lambda2", 1);
    value("two_point(t=" + fmt(t) + ",lambda1=" + fmt(l1) + ",lambda2=" + fmt(l2) + ")",
          analytic::two_point_perimeter_lt(t, l1, l2));
  } else if (f == "cond_backward_lt") {
    double s = p.num("s", 1), t = p.num("t", 2), z = p.num("z", 0), l = p.num("lambda", 1.5);
    value("cond_backward_lt(s=" + fmt(s) + ",t=" + fmt(t) + ",z=" + fmt(z) + ",lambda=" + fmt(l) + ")",
          analytic::cond_backward_lt(s, t, z, l));
  } else if (f == "moments") {
    double x = p.num("x", 0), t = p.num("t", 1);
    auto k = static_cast<int>(p.count("p", 1));
    value("moment(x=" + fmt(x) + ",t=" + fmt(t) + ",p=" + std::to_string(k) + ")",
          analytic::moments_ssmp(x, t, k));
  } else if (f == "appendix_F_f") {
    double s = p.num("s", 1), a = p.num("a", 1), nu = p.num("nu", 1);
    auto r = analytic::appendix_F_f(s, a, nu);
    value("F(s=" + fmt(s) + ",a=" + fmt(a) + ",nu=" + fmt(nu) + ")", r.F);
    value("f(s=" + fmt(s) + ",a=" + fmt(a) + ",nu=" + fmt(nu) + ")", r.f);
  } else if (f == "tec") {
    double x = p.num("x", 1), y = p.num("y", 2), c = p.num("c", 0.5);
    value("tec(x=" + fmt(x) + ",y=" + fmt(y) + ",c=" + fmt(c) + ")", analytic::tec_formu_value(x, y, c));
  } else {
    fail(ErrorKind::config, "eval: unknown formula " + f);
  }
  (void)cfg;
  out.samples.columns = {"estimate", "oracle"};
  for (const auto& c : out.checks) out.samples.rows.push_back({c.estimate, c.oracle});
  return out;
}

// ---------------------------------------------------------------- hull-exact

ExperimentResult hull_exact(const ExperimentConfig& cfg, ParamReader& p) {
  ExperimentResult out;
  const double r = p.num("r", 1);
  const std::size_t n = cfg.replicates ? cfg.replicates : 100000;
  const double r2 = p.num("scale_r", 2);
  const std::size_t indep_n = p.count("independence_n", 20000);
  const auto perms = static_cast<int>(p.count("permutations", 200));
  const auto lts = p.list("lt", {1.0});
  p.finish();
  McOptions mc{cfg.seed, cfg.workers, 0};
  auto hs = exact_samples(r, n, mc);

  auto z = column(hs, &hull::HullSample::z);
  auto beta = column(hs, &hull::HullSample::beta);
  auto gamma = column(hs, &hull::HullSample::gamma);
  out.checks.push_back(tagged(stats::make_test("z_ks_exp", stats::ks_test(z, exp_cdf(2 * r * r / 3))), z));
  auto mb = stats::mean_se(beta), mg = stats::mean_se(gamma);
  out.checks.push_back(tagged(stats::make_check("beta_mean", mb.mean, mb.stderr, r * r / 3, 0), beta));
  out.checks.push_back(tagged(stats::make_check("gamma_mean", mg.mean, mg.stderr, r * r / 3, 0), gamma));
  auto bcdf = [r](double t) { return analytic::beta_cdf(r, t); };
  out.checks.push_back(tagged(stats::make_test("beta_ks_invgamma", stats::ks_test(beta, bcdf)), beta));
  out.checks.push_back(tagged(stats::make_test("gamma_ks_invgamma", stats::ks_test(gamma, bcdf)), gamma));
  for (double l : lts) {
    auto e = stats::empirical_lt(z, {l})[0];
    out.checks.push_back(tagged(
        stats::make_check("z_lt(lambda=" + fmt(l) + ")", e.estimate, e.stderr, 1 / (1 + 2 * l * r * r / 3), 0),
        z));
  }
  independence_checks(out, hs, indep_n, cfg.seed, perms);
  if (r2 > 0) {
    McOptions m2{cfg.seed, cfg.workers, n};
    auto hs2 = exact_samples(r2, n, m2);
    scale_checks(out, hs, hs2, (r2 / r) * (r2 / r), "scale_");
  }
  out.samples = hull_table(hs);
  return out;
}

// ---------------------------------------------------------------- hull-constructive

struct ConstructiveRun {
  std::vector<hull::HullSample> samples;
  hull::ConstructiveDiagnostics diag;
};

ConstructiveRun constructive(const hull::ConstructiveHullConfig& hc, std::size_t n, const McOptions& mc) {
  ConstructiveRun run;
  std::vector<hull::ConstructiveDiagnostics> d(n);
  run.samples = parallel_map<hull::HullSample>(n, mc.workers, [&](std::size_t i) {
    RngStream rng(mc.seed, mc.stream_base + i);
    return hull::sample_hull_constructive(hc, rng, &d[i]);
  });
  for (const auto& x : d) {
    run.diag.outer_trees += x.outer_trees;
    run.diag.nodes += x.nodes;
    run.diag.tail_mean = x.tail_mean;
  }
  return run;
}

ExperimentResult hull_constructive(const ExperimentConfig& cfg, ParamReader& p) {
  ExperimentResult out;
  hull::ConstructiveHullConfig hc;
  hc.r = p.num("r", 1);
  hc.spine_tol = p.num("spine_tol", hc.spine_tol);
  hc.spine_kappa = p.num("spine_kappa", hc.spine_kappa);
  hc.exit_depth = p.num("exit_depth", hc.exit_depth);
  hc.height_factor = p.num("height_factor", hc.height_factor);
  hc.inner_height = p.num("inner_height", hc.inner_height);
  hc.volumes = p.flag("volumes", false);
  hc.tail_compensation = p.flag("tail_compensation", true);
  hc.snake_cfg.tree_resolution = p.num("tree_resolution", hc.snake_cfg.tree_resolution);
  hc.snake_cfg.refine = p.num("refine", hc.snake_cfg.refine);
  const std::size_t n = cfg.replicates ? cfg.replicates : 2000;
  const std::size_t exact_n = p.count("exact_n", 100000);
  const std::size_t diag_n = p.count("diag_n", 500);
  const auto diag_factors = p.list("diag_factors", {4.0, 2.0});
  const double r2 = p.num("scale_r", 2);
  const std::size_t scale_n = p.count("scale_n", 1000);
  const auto perms = static_cast<int>(p.count("permutations", 200));
  hull::validate(hc);
  p.finish();

  // Stream layout: main run, diagnostics, scaled run, exact comparison.
  std::uint64_t base = 0;
  McOptions mc{cfg.seed, cfg.workers, base};
  auto main = constructive(hc, n, mc);
  base += n;
  const double r = hc.r, oracle = 2 * r * r / 3;

  auto z = column(main.samples, &hull::HullSample::z);
  auto mz = stats::mean_se(z);
  out.checks.push_back(tagged(stats::make_check("z_mean_within_10pct", mz.mean, mz.stderr, oracle,
                                                kConstructiveRel * oracle, 0),
                              z));

  json diag = json::array();
  for (double f : diag_factors) {
    hull::ConstructiveHullConfig hd = hc;
    hd.height_factor = hc.height_factor * f;
    auto run = constructive(hd, diag_n, {cfg.seed, cfg.workers, base});
    base += diag_n;
    auto m = stats::mean_se(column(run.samples, &hull::HullSample::z));
    diag.push_back({{"height_factor", hd.height_factor}, {"n", diag_n}, {"z_mean", m.mean},
                    {"z_stderr", m.stderr}, {"outer_trees", run.diag.outer_trees}, {"nodes", run.diag.nodes}});
  }
  diag.push_back({{"height_factor", hc.height_factor}, {"n", n}, {"z_mean", mz.mean}, {"z_stderr", mz.stderr},
                  {"outer_trees", main.diag.outer_trees}, {"nodes", main.diag.nodes}});
  out.diagnostics["resolutions"] = diag;
  out.diagnostics["tail_mean"] = main.diag.tail_mean;

  auto ex = exact_samples(r, exact_n, {cfg.seed, cfg.workers, base + (1ULL << 40)});
  for (auto [name, f] : {std::pair{"beta", &hull::HullSample::beta}, std::pair{"gamma", &hull::HullSample::gamma}}) {
    auto a = column(main.samples, f), b = column(ex, f);
    out.checks.push_back(tagged(stats::make_test(std::string(name) + "_ks2_exact", stats::ks_two_sample(a, b)), a));
  }
  independence_checks(out, main.samples, main.samples.size(), cfg.seed, perms);
  if (r2 > 0 && scale_n > 0) {
    // Lengths scale by c and heights by c^2, so the scaled run is the image of the main one.
    const double c = r2 / r;
    hull::ConstructiveHullConfig hs = hc;
    hs.r = r2;
    hs.exit_depth *= c;
    hs.inner_height *= c * c;
    hs.snake_cfg.eps_height *= c * c;
    hs.snake_cfg.tree_resolution *= c * c;
    hs.snake_cfg.max_resolution *= c * c;
    hs.snake_cfg.label_step *= c;
    auto run = constructive(hs, scale_n, {cfg.seed, cfg.workers, base});
    base += scale_n;
    scale_checks(out, main.samples, run.samples, (r2 / r) * (r2 / r), "scale_");
  }
  out.samples = hull_table(main.samples);
  return out;
}

// ---------------------------------------------------------------- fk-appendix

ExperimentResult fk_appendix(const ExperimentConfig& cfg, ParamReader& p) {
  ExperimentResult out;
  const double r = p.num("r", 1), mu = p.num("mu", 1), nu = p.num("nu", 1), nu0 = p.num("nu0", 1.5);
  hull::FkOptions fo;
  fo.spine_tol = p.num("spine_tol", fo.spine_tol);
  fo.spine_kappa = p.num("spine_kappa", fo.spine_kappa);
  hull::TecOptions to;
  to.base_step = p.num("tec_step", to.base_step);
  const double x = p.num("x", 1), y = p.num("y", 2), c = p.num("c", 0.5);
  const std::size_t n = cfg.replicates ? cfg.replicates : 100000;
  const std::size_t n_tec = p.count("tec_replicates", n);
  p.finish();

  auto fk = parallel_map<std::vector<double>>(n, cfg.workers, [&](std::size_t i) {
    RngStream rng(cfg.seed, i);
    return hull::fk_gamma_volume_path(r, {{mu, nu}, {0.0, nu0}}, rng, fo);
  });
  auto tec = parallel_map<double>(n_tec, cfg.workers, [&](std::size_t i) {
    RngStream rng(cfg.seed, n + i);
    return hull::fk_tec_path(x, y, c, rng, to);
  });
  std::vector<double> g(n), g0(n);
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = fk[i][0];
    g0[i] = fk[i][1];
  }
  auto mg = stats::mean_se(g), m0 = stats::mean_se(g0), mt = stats::mean_se(tec);
  out.checks.push_back(tagged(stats::make_check("fk_gamma_volume(r=" + fmt(r) + ",mu=" + fmt(mu) + ",nu=" + fmt(nu) + ")",
                                                mg.mean, mg.stderr, analytic::big_G(r, mu, nu), kFkBudget),
                              g));
  out.checks.push_back(tagged(stats::make_check("fk_gamma_lt(r=" + fmt(r) + ",nu=" + fmt(nu0) + ")", m0.mean,
                                                m0.stderr, analytic::gamma_lt(r, nu0), kFkBudget),
                              g0));
  out.checks.push_back(tagged(stats::make_check("fk_tec(x=" + fmt(x) + ",y=" + fmt(y) + ",c=" + fmt(c) + ")",
                                                mt.mean, mt.stderr, analytic::tec_formu_value(x, y, c), kTecBudget),
                              tec));
  out.samples.columns = {"fk_gamma_volume", "fk_gamma_lt", "fk_tec"};
  for (std::size_t i = 0; i < std::max(n, n_tec); ++i)
    out.samples.rows.push_back({i < n ? g[i] : kNaN, i < n ? g0[i] : kNaN, i < n_tec ? tec[i] : kNaN});
  return out;
}

// ---------------------------------------------------------------- joint-lt

ExperimentResult joint_lt(const ExperimentConfig& cfg, ParamReader& p) {
  ExperimentResult out;
  const double r = p.num("r", 1), l = p.num("lambda", 1), nu1 = p.num("nu1", 1), nu2 = p.num("nu2", 1),
               mu = p.num("mu", 1);
  hull::FkOptions fo;
  fo.spine_tol = p.num("spine_tol", fo.spine_tol);
  fo.spine_kappa = p.num("spine_kappa", fo.spine_kappa);
  const std::size_t n = cfg.replicates ? cfg.replicates : 100000;
  p.finish();
  auto rep = hull::verify_joint_lt(r, l, nu1, nu2, mu, n, {cfg.seed, cfg.workers, 0}, fo);
  // Each factor carries the Feynman-Kac budget relative to its size.
  double budget = rep.zv0_closed * kFkBudget * (rep.beta_factor.estimate + rep.gamma_factor.estimate);
  out.checks.push_back(stats::make_check("joint_lt_product", rep.product.estimate, rep.product.stderr, rep.oracle, budget));
  out.checks.push_back(stats::make_check("z_v0_factor", rep.zv0_mc.estimate, rep.zv0_mc.stderr, rep.zv0_closed, 0));
  out.samples.columns = {"zv0_closed", "zv0_mc", "zv0_mc_se", "beta_factor", "beta_factor_se", "gamma_factor",
                         "gamma_factor_se", "product", "product_se", "oracle"};
  out.samples.rows.push_back({rep.zv0_closed, rep.zv0_mc.estimate, rep.zv0_mc.stderr, rep.beta_factor.estimate,
                              rep.beta_factor.stderr, rep.gamma_factor.estimate, rep.gamma_factor.stderr,
                              rep.product.estimate, rep.product.stderr, rep.oracle});
  return out;
}

// ---------------------------------------------------------------- snake-hitting

ExperimentResult snake_hitting(const ExperimentConfig& cfg, ParamReader& p) {
  ExperimentResult out;
  snake::SnakeSampleConfig sc = snake::counting_config();
  sc.tree_resolution = p.num("tree_resolution", sc.tree_resolution);
  sc.refine = p.num("refine", sc.refine);
  sc.step_factor = p.num("step_factor", sc.step_factor);
  const double x0 = p.num("x0", 1), y = p.num("y", -1);
  const double eps = p.num("eps_height", 0.01);
  const double ex0 = p.num("exit_x0", 2), er = p.num("exit_r", 1), depth = p.num("exit_depth", 0.5);
  const double eeps = p.num("exit_eps_height", 0.05);
  const std::size_t n = cfg.replicates ? cfg.replicates : 100000;
  const std::size_t ne = p.count("exit_replicates", n);
  p.finish();

  snake::SnakeSampleConfig hc = sc;
  hc.eps_height = eps;
  auto hit = parallel_map<double>(n, cfg.workers, [&](std::size_t i) {
    RngStream rng(cfg.seed, i);
    return snake::hitting_tree(x0, y, hc, rng) / (2 * eps);
  });
  snake::SnakeSampleConfig ec = sc;
  ec.eps_height = eeps;
  std::vector<std::size_t> nodes(ne);
  auto exit = parallel_map<double>(ne, cfg.workers, [&](std::size_t i) {
    RngStream rng(cfg.seed, n + i);
    double h = snake::sample_height(eeps, rng);
    auto e = snake::exit_count_tree(ex0, h, er, depth, ec, rng);
    nodes[i] = e.nodes;
    return e.z / (2 * eeps);
  });
  auto mh = stats::mean_se(hit), me = stats::mean_se(exit);
  out.checks.push_back(tagged(stats::make_check("hitting(x0=" + fmt(x0) + ",y=" + fmt(y) + ")", mh.mean, mh.stderr,
                                                analytic::hitting_prob(x0, y), kHittingBudget),
                              hit));
  double oz = std::pow(er / ex0, 3);
  out.checks.push_back(tagged(
      stats::make_check("exit_mean(x0=" + fmt(ex0) + ",r=" + fmt(er) + ")", me.mean, me.stderr, oz, kExitBudget), exit));
  std::size_t tot = 0;
  for (auto k : nodes) tot += k;
  out.diagnostics["exit_nodes_per_tree"] = ne ? static_cast<double>(tot) / static_cast<double>(ne) : 0.0;
  out.samples.columns = {"hitting", "exit"};
  for (std::size_t i = 0; i < std::max(n, ne); ++i)
    out.samples.rows.push_back({i < n ? hit[i] : kNaN, i < ne ? exit[i] : kNaN});
  return out;
}

// ---------------------------------------------------------------- perimeter

perimeter::LampertiOptions lamperti_options(ParamReader& p) {
  perimeter::LampertiOptions o;
  o.xi.jump_cutoff_eps = p.num("jump_cutoff_eps", o.xi.jump_cutoff_eps);
  o.xi.step = p.num("xi_step", o.xi.step);
  o.clock_step = p.num("clock_step", o.clock_step);
  std::string mode = p.str("small_jumps", "gaussian");
  if (mode == "gaussian") o.xi.small_jump_mode = sampler::SmallJumpMode::gaussian_correction;
  else if (mode == "drift") o.xi.small_jump_mode = sampler::SmallJumpMode::compensating_drift;
  else fail(ErrorKind::config, "small_jumps must be gaussian or drift");
  sampler::validate(o.xi);
  return o;
}

ExperimentResult perimeter_forward(const ExperimentConfig& cfg, ParamReader& p) {
  ExperimentResult out;
  auto lo = lamperti_options(p);
  const double t0 = p.num("t0", 0.005), t = p.num("t", 1);
  const double l1 = p.num("lambda1", 0), l2 = p.num("lambda2", 1);
  const std::size_t n = cfg.replicates ? cfg.replicates : 20000;
  const std::size_t nl = p.count("levy_replicates", 10000);
  const std::size_t nc = p.count("csbp_replicates", 20000);
  const double cstep = p.num("csbp_step", 1e-3), cs = p.num("csbp_s", 1), cl = p.num("csbp_lambda", 1.5);
  const auto qs = p.list("q", {0.25, 0.5, 1, 2, 5});
  const auto qmc = p.list("mgf_q", {0.5, 1});
  p.finish();

  std::vector<double> obs{1.0, 1.0 + t};
  auto rows = perimeter::forward_marginals(obs, t0, lo, n, {cfg.seed, cfg.workers, 0});
  std::vector<double> z1(n), z2(n), tp(n), sq(n);
  for (std::size_t i = 0; i < n; ++i) {
    z1[i] = rows[i][0];
    z2[i] = rows[i][1];
    tp[i] = std::exp(-1.5 * (l1 * z1[i] + l2 * z2[i]));
    sq[i] = z1[i] * z1[i];
  }
  out.checks.push_back(tagged(stats::make_test("z1_ks_exp", stats::ks_test(z1, exp_cdf(2.0 / 3.0))), z1));
  auto m2 = stats::mean_se(tp);
  out.checks.push_back(tagged(stats::make_check("two_point_lt(t=" + fmt(t) + ",lambda1=" + fmt(l1) + ",lambda2=" + fmt(l2) + ")",
                                                m2.mean, m2.stderr, analytic::two_point_perimeter_lt(t, l1, l2),
                                                kTwoPointBudget),
                              tp));
  for (int k = 1; k <= 2; ++k) {
    auto m = stats::mean_se(k == 1 ? z1 : sq);
    double target = analytic::moments_ssmp(0, 1, k);
    out.checks.push_back(tagged(stats::make_check("moment_p=" + std::to_string(k), m.mean, m.stderr, target,
                                                  kMomentBudget * target),
                                k == 1 ? z1 : sq));
  }

  for (double q : qs)
    out.checks.push_back(stats::make_check("psi_vs_lk(q=" + fmt(q) + ")", analytic::psi_levy(q), 0,
                                           analytic::psi_levy_lk(q), kLkBudget, 0));
  sampler::LevyXiStepper st(lo.xi);
  auto xi1 = parallel_map<double>(nl, cfg.workers, [&](std::size_t i) {
    RngStream rng(cfg.seed, n + i);
    return sampler::levy_xi_path(1.0, lo.xi, rng).values.back();
  });
  for (double q : qmc) {
    std::vector<double> e(nl);
    for (std::size_t i = 0; i < nl; ++i) e[i] = std::exp(q * xi1[i]);
    auto m = stats::mean_se(e);
    out.checks.push_back(tagged(stats::make_check("levy_mgf(q=" + fmt(q) + ")", m.mean, m.stderr,
                                                  std::exp(analytic::psi_levy(q)), st.bias_bound(q, 1.0)),
                                e));
  }

  auto yc = parallel_map<double>(nc, cfg.workers, [&](std::size_t i) {
    RngStream rng(cfg.seed, n + nl + i);
    return perimeter::simulate_csbp_immigration(0, cs, cstep, rng).values.back();
  });
  std::vector<double> ec(nc);
  for (std::size_t i = 0; i < nc; ++i) ec[i] = std::exp(-cl * yc[i]);
  auto mc = stats::mean_se(ec);
  out.checks.push_back(tagged(stats::make_check("csbp_lt(x0=0,s=" + fmt(cs) + ",lambda=" + fmt(cl) + ")", mc.mean,
                                                mc.stderr, analytic::csbp_imm_lt(0, cs, cl), kCsbpBudget),
                              ec));
  out.diagnostics["levy_truncation_budget_q1"] = st.bias_bound(1.0, 1.0);

  out.samples.columns = {"z1", "z1pt", "xi1", "csbp_y"};
  for (std::size_t i = 0; i < std::max({n, nl, nc}); ++i)
    out.samples.rows.push_back({i < n ? z1[i] : kNaN, i < n ? z2[i] : kNaN, i < nl ? xi1[i] : kNaN,
                                i < nc ? yc[i] : kNaN});
  return out;
}

ExperimentResult perimeter_backward(const ExperimentConfig& cfg, ParamReader& p) {
  ExperimentResult out;
  perimeter::BackwardHConfig bc;
  bc.t = p.num("t", 2);
  bc.x = p.num("x", 1);
  bc.resample_threshold = p.num("resample_threshold", bc.resample_threshold);
  bc.n_particles = cfg.replicates ? cfg.replicates : 10000;
  const double s = p.num("s", 1), l = p.num("lambda", 1.5), step = p.num("step", 1e-3);
  perimeter::validate(bc);
  p.finish();
  RngStream rng(cfg.seed, 0);
  auto ens = perimeter::simulate_backward_htransform(bc, step, rng, {s});
  auto lt = stats::weighted_lt(ens.values[0], ens.weights[0], l);
  out.checks.push_back(tagged(stats::make_check("backward_lt(t=" + fmt(bc.t) + ",x=" + fmt(bc.x) + ",s=" + fmt(s) +
                                                    ",lambda=" + fmt(l) + ")",
                                                lt.estimate, lt.stderr,
                                                analytic::cond_backward_lt(s, bc.t, bc.x, l), kBackwardBudget),
                              ens.values[0]));
  out.diagnostics["ess"] = ens.ess;
  out.diagnostics["resamples"] = ens.resamples;
  out.samples.columns = {"y", "weight"};
  for (std::size_t i = 0; i < ens.values[0].size(); ++i)
    out.samples.rows.push_back({ens.values[0][i], ens.weights[0][i]});
  return out;
}

ExperimentResult perimeter_crosscheck(const ExperimentConfig& cfg, ParamReader& p) {
  ExperimentResult out;
  perimeter::CrosscheckConfig cc;
  cc.lamperti = lamperti_options(p);
  cc.t_grid = p.list("t", cc.t_grid);
  cc.n = cfg.replicates ? cfg.replicates : 10000;
  cc.entrance_t0 = p.num("t0", cc.entrance_t0);
  cc.csbp_step = p.num("csbp_step", cc.csbp_step);
  cc.resample_threshold = p.num("resample_threshold", cc.resample_threshold);
  cc.two_point_t = p.num("two_point_t", cc.two_point_t);
  cc.lambda1 = p.num("lambda1", cc.lambda1);
  cc.lambda2 = p.num("lambda2", cc.lambda2);
  cc.two_point_budget = kTwoPointBudget;
  p.finish();
  auto rep = perimeter::crosscheck_constructions(cc, {cfg.seed, cfg.workers, 0});
  out.checks = rep.checks;
  out.samples.columns = {"t", "forward", "backward", "backward_weight"};
  for (std::size_t g = 0; g < cc.t_grid.size(); ++g)
    for (std::size_t i = 0; i < std::max(rep.forward[g].size(), rep.backward[g].size()); ++i)
      out.samples.rows.push_back({cc.t_grid[g], i < rep.forward[g].size() ? rep.forward[g][i] : kNaN,
                                  i < rep.backward[g].size() ? rep.backward[g][i] : kNaN,
                                  i < rep.backward_w[g].size() ? rep.backward_w[g][i] : kNaN});
  return out;
}

// ---------------------------------------------------------------- report

ExperimentResult report(const ExperimentConfig& cfg, ParamReader& p) {
  ExperimentResult out;
  fs::path in = p.str("input", cfg.out_dir);
  p.finish();
  require(fs::is_directory(in), ErrorKind::io, "report: not a directory: " + in.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(in))
    if (e.is_regular_file() && e.path().filename() == "summary.json" && e.path().parent_path() != fs::path(cfg.out_dir))
      files.push_back(e.path());
  std::sort(files.begin(), files.end());
  require(!files.empty(), ErrorKind::io, "report: no summary.json under " + in.string());
  json runs = json::array();
  for (const auto& f : files) {
    std::ifstream is(f);
    json s;
    try {
      s = json::parse(is);
    } catch (const std::exception& e) {
      fail(ErrorKind::io, "report: cannot parse " + f.string() + ": " + e.what());
    }
    std::string exp = s.value("experiment", f.parent_path().filename().string());
    for (const auto& c : s.at("checks")) {
      Check k;
      k.name = exp + "/" + c.at("test").get<std::string>();
      auto num = [&](const char* key) { return c.at(key).is_number() ? c.at(key).get<double>() : kNaN; };
      k.estimate = num("estimate");
      k.stderr = num("stderr");
      k.oracle = num("oracle");
      k.bias_budget = num("bias_budget");
      k.pass = c.at("pass").get<bool>();
      if (c.contains("p_value") && c.at("p_value").is_number()) k.p_value = c.at("p_value").get<double>();
      if (c.contains("inputs_digest")) k.digest = c.at("inputs_digest").get<std::string>();
      out.checks.push_back(k);
    }
    runs.push_back({{"file", fs::relative(f, in).string()}, {"experiment", exp}, {"pass", s.value("pass", false)}});
  }
  out.diagnostics["runs"] = runs;
  out.samples.columns = {"estimate", "stderr", "oracle", "bias_budget", "pass"};
  for (const auto& c : out.checks)
    out.samples.rows.push_back({c.estimate, c.stderr, c.oracle, c.bias_budget, c.pass ? 1.0 : 0.0});
  return out;
}

using Runner = ExperimentResult (*)(const ExperimentConfig&, ParamReader&);

const std::vector<std::pair<std::string, Runner>>& registry() {
  static const std::vector<std::pair<std::string, Runner>> r{
      {"eval", eval},
      {"hull-exact", hull_exact},
      {"hull-constructive", hull_constructive},
      {"fk-appendix", fk_appendix},
      {"joint-lt", joint_lt},
      {"snake-hitting", snake_hitting},
      {"perimeter-forward", perimeter_forward},
      {"perimeter-backward", perimeter_backward},
      {"perimeter-crosscheck", perimeter_crosscheck},
      {"report", report},
  };
  return r;
}

std::string section_of(const std::string& exp) {
  if (exp.rfind("hull", 0) == 0) return "hull";
  if (exp == "fk-appendix" || exp == "joint-lt") return "fk";
  if (exp == "snake-hitting") return "snake";
  if (exp.rfind("perimeter", 0) == 0) return "perimeter";
  return exp;
}

void write_text(const fs::path& path, const std::string& s) {
  std::ofstream os(path, std::ios::binary);
  require(static_cast<bool>(os), ErrorKind::io, "cannot write " + path.string());
  os << s;
  require(static_cast<bool>(os), ErrorKind::io, "write failed: " + path.string());
}

}  // namespace

// ---------------------------------------------------------------- public

double ParamReader::num(const std::string& key, double def) {
  const std::string* v = find(key);
  return v ? parse_double(key, *v) : def;
}

std::size_t ParamReader::count(const std::string& key, std::size_t def) {
  const std::string* v = find(key);
  if (!v) return def;
  double d = parse_double(key, *v);
  require(d >= 0 && d == std::floor(d) && d < 1e15, ErrorKind::config,
          "parameter " + key + ": expected a nonnegative integer");
  return static_cast<std::size_t>(d);
}

std::string ParamReader::str(const std::string& key, const std::string& def) {
  const std::string* v = find(key);
  return v ? *v : def;
}

std::vector<double> ParamReader::list(const std::string& key, const std::vector<double>& def) {
  const std::string* v = find(key);
  if (!v) return def;
  std::vector<double> out;
  std::stringstream ss(*v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, item));
  require(!out.empty(), ErrorKind::config, "parameter " + key + ": empty list");
  return out;
}

bool ParamReader::flag(const std::string& key, bool def) {
  const std::string* v = find(key);
  if (!v) return def;
  if (*v == "1" || *v == "true" || *v == "yes" || *v == "on") return true;
  if (*v == "0" || *v == "false" || *v == "no" || *v == "off") return false;
  fail(ErrorKind::config, "parameter " + key + ": expected a boolean");
}

const std::string* ParamReader::find(const std::string& key) {
  for (const std::string& k : {section_ + "." + key, key}) {
    auto it = p_.find(k);
    if (it != p_.end()) {
      used_.insert(k);
      return &it->second;
    }
  }
  return nullptr;
}

void ParamReader::finish() const {
  for (const auto& [k, v] : p_)
    if (!used_.count(k)) fail(ErrorKind::config, "unknown parameter: " + k);
}

bool ExperimentResult::all_pass() const {
  return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& [k, v] : registry()) n.push_back(k);
    return n;
  }();
  return names;
}

void validate(const ExperimentConfig& cfg) {
  const auto& n = experiment_names();
  require(std::find(n.begin(), n.end(), cfg.experiment) != n.end(), ErrorKind::config,
          "unknown experiment: " + cfg.experiment);
  require(cfg.workers >= 1, ErrorKind::config, "workers must be >= 1");
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  ExperimentConfig c = cfg;
  c.workers = resolve_workers(cfg.workers);
  ParamReader p(c.params, section_of(c.experiment));
  for (const auto& [name, fn] : registry())
    if (name == c.experiment) {
      ExperimentResult r = fn(c, p);
      p.finish();
      return r;
    }
  fail(ErrorKind::config, "unknown experiment: " + c.experiment);
}

Params load_config_file(const std::string& path) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(path, tree);
  } catch (const pt::ini_parser_error& e) {
    fail(ErrorKind::config, std::string("config file: ") + e.what());
  }
  Params out;
  for (const auto& [k, v] : tree) {
    if (v.empty()) {
      out[k] = v.data();
    } else {
      for (const auto& [k2, v2] : v) out[k + "." + k2] = v2.data();
    }
  }
  return out;
}

const char* code_version() { return HPL_CODE_VERSION; }

json summary_json(const ExperimentConfig& cfg, const ExperimentResult& r) {
  json checks = json::array();
  for (const auto& c : r.checks) checks.push_back(stats::to_json(c));
  return {{"experiment", cfg.experiment}, {"seed", cfg.seed}, {"pass", r.all_pass()},
          {"checks", checks},             {"diagnostics", r.diagnostics}};
}

json manifest_json(const ExperimentConfig& cfg) {
  return {{"config",
           {{"experiment", cfg.experiment},
            {"params", cfg.params},
            {"seed", cfg.seed},
            {"replicates", cfg.replicates},
            {"workers", resolve_workers(cfg.workers)},
            {"out_dir", cfg.out_dir}}},
          {"seed", cfg.seed},
          {"code_version", code_version()},
          {"schema", 1}};
}

void write_csv(const std::string& path, const Table& t) {
  std::ostringstream os;
  os << "# schema=1\n";
  for (std::size_t j = 0; j < t.columns.size(); ++j) os << (j ? "," : "") << t.columns[j];
  os << '\n';
  char buf[32];
  for (const auto& row : t.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) os << ',';
      if (!std::isnan(row[j])) {
        std::snprintf(buf, sizeof buf, "%.17g", row[j]);
        os << buf;
      }
    }
    os << '\n';
  }
  write_text(path, os.str());
}

int run(const ExperimentConfig& cfg) {
  try {
    validate(cfg);
    fs::create_directories(cfg.out_dir);
    ExperimentResult r = run_experiment(cfg);
    fs::path out(cfg.out_dir);
    write_csv((out / "samples.csv").string(), r.samples);
    write_text(out / "summary.json", summary_json(cfg, r).dump(2) + "\n");
    write_text(out / "manifest.json", manifest_json(cfg).dump(2) + "\n");
    for (const auto& c : r.checks)
      std::printf("%-4s %-48s estimate=%.6g oracle=%.6g\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.estimate,
                  c.oracle);
    return r.all_pass() ? 0 : 1;
  } catch (const Error& e) {
    json rec{{"error", to_string(e.kind())}, {"message", e.what()}, {"experiment", cfg.experiment}};
    std::cerr << rec.dump() << '\n';
    return 2;
  } catch (const std::exception& e) {
    json rec{{"error", "internal"}, {"message", e.what()}, {"experiment", cfg.experiment}};
    std::cerr << rec.dump() << '\n';
    return 2;
  }
}

}  // namespace hpl::cli
