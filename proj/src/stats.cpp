#include "hpl/stats.hpp"

#include <algorithm>
#include <array>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <numeric>

#include "hpl/error.hpp"

namespace hpl::stats {

namespace {

const double kPi = 3.14159265358979323846;

std::vector<std::size_t> order_of(const std::vector<double>& x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  return idx;
}

// a_i = sum_j |x_i - x_j|
std::vector<double> row_sums(const std::vector<double>& x) {
  const std::size_t n = x.size();
  auto idx = order_of(x);
  double total = 0;
  for (double v : x) total += v;
  std::vector<double> a(n);
  double prefix = 0;
  for (std::size_t k = 0; k < n; ++k) {
    double v = x[idx[k]];
    double below = static_cast<double>(k) * v - prefix;
    double above = (total - prefix - v) - static_cast<double>(n - k - 1) * v;
    a[idx[k]] = below + above;
    prefix += v;
  }
  return a;
}

struct Fenwick {
  explicit Fenwick(std::size_t n) : t(n + 1, {0, 0, 0, 0}) {}
  void add(std::size_t i, const std::array<double, 4>& v) {
    for (++i; i < t.size(); i += i & (~i + 1))
      for (int k = 0; k < 4; ++k) t[i][k] += v[k];
  }
  std::array<double, 4> prefix(std::size_t i) const {  // entries [0, i]
    std::array<double, 4> s{0, 0, 0, 0};
    for (++i; i > 0; i -= i & (~i + 1))
      for (int k = 0; k < 4; ++k) s[k] += t[i][k];
    return s;
  }
  std::vector<std::array<double, 4>> t;
};

// sum over i, j of |x_i - x_j| |y_i - y_j|
double cross_sum(const std::vector<double>& x, const std::vector<double>& y,
                 const std::vector<std::size_t>& xorder) {
  const std::size_t n = x.size();
  std::vector<double> ys(y);
  std::sort(ys.begin(), ys.end());
  Fenwick fw(n);
  std::array<double, 4> tot{0, 0, 0, 0};
  double s = 0;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t i = xorder[k];
    double xi = x[i], yi = y[i];
    std::size_t rank = static_cast<std::size_t>(std::upper_bound(ys.begin(), ys.end(), yi) - ys.begin()) - 1;
    auto lo = fw.prefix(rank);  // earlier points with y_j <= y_i: count, sum x, sum y, sum xy
    std::array<double, 4> hi;
    for (int q = 0; q < 4; ++q) hi[q] = tot[q] - lo[q];
    auto part = [&](const std::array<double, 4>& m) {
      return xi * yi * m[0] - xi * m[2] - yi * m[1] + m[3];
    };
    s += part(lo) - part(hi);
    std::array<double, 4> v{1, xi, yi, xi * yi};
    fw.add(rank, v);
    for (int q = 0; q < 4; ++q) tot[q] += v[q];
  }
  return 2 * s;
}

double dcov2(const std::vector<double>& x, const std::vector<double>& y,
             const std::vector<std::size_t>& xorder, const std::vector<double>& a,
             const std::vector<double>& b) {
  const double n = static_cast<double>(x.size());
  double sa = std::accumulate(a.begin(), a.end(), 0.0);
  double sb = std::accumulate(b.begin(), b.end(), 0.0);
  double s3 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) s3 += a[i] * b[i];
  double s1 = cross_sum(x, y, xorder);
  return s1 / (n * n) + (sa / (n * n)) * (sb / (n * n)) - 2 * s3 / (n * n * n);
}

}  // namespace

double kolmogorov_q(double lambda) {
  if (lambda <= 0) return 1;
  if (lambda < 1.18) {
    double s = 0;
    for (int k = 1; k <= 20; ++k) {
      double m = (2 * k - 1) * kPi;
      s += std::exp(-m * m / (8 * lambda * lambda));
    }
    return std::clamp(1 - std::sqrt(2 * kPi) / lambda * s, 0.0, 1.0);
  }
  double s = 0;
  for (int k = 1; k <= 100; ++k) {
    double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 ? 1 : -1) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(2 * s, 0.0, 1.0);
}

TestResult ks_test(const std::vector<double>& sample, const std::function<double(double)>& cdf) {
  const std::size_t n = sample.size();
  require(n >= 10, ErrorKind::domain, "ks_test: need at least 10 values");
  std::vector<double> x(sample);
  std::sort(x.begin(), x.end());
  require(x.front() != x.back(), ErrorKind::degenerate, "ks_test: all values equal");
  double d = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double f = cdf(x[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  double en = std::sqrt(static_cast<double>(n));
  return {d, kolmogorov_q((en + 0.12 + 0.11 / en) * d)};
}

TestResult ks_two_sample(const std::vector<double>& a, const std::vector<double>& b,
                         const std::vector<double>& wa, const std::vector<double>& wb) {
  require(a.size() >= 2 && b.size() >= 2, ErrorKind::domain, "ks_two_sample: samples too small");
  require(wa.empty() || wa.size() == a.size(), ErrorKind::length_mismatch, "ks_two_sample: weights");
  require(wb.empty() || wb.size() == b.size(), ErrorKind::length_mismatch, "ks_two_sample: weights");
  auto prep = [](const std::vector<double>& x, const std::vector<double>& w) {
    std::vector<std::pair<double, double>> v(x.size());
    double sw = 0, sw2 = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double wi = w.empty() ? 1.0 : w[i];
      require(wi >= 0, ErrorKind::domain, "ks_two_sample: negative weight");
      v[i] = {x[i], wi};
      sw += wi;
      sw2 += wi * wi;
    }
    require(sw > 0, ErrorKind::weight_collapse, "ks_two_sample: zero total weight");
    std::sort(v.begin(), v.end());
    for (auto& p : v) p.second /= sw;
    return std::make_pair(v, sw * sw / sw2);
  };
  auto [va, na] = prep(a, wa);
  auto [vb, nb] = prep(b, wb);
  std::size_t i = 0, j = 0;
  double fa = 0, fb = 0, d = 0;
  while (i < va.size() || j < vb.size()) {
    double t = std::min(i < va.size() ? va[i].first : INFINITY, j < vb.size() ? vb[j].first : INFINITY);
    while (i < va.size() && va[i].first == t) fa += va[i++].second;
    while (j < vb.size() && vb[j].first == t) fb += vb[j++].second;
    d = std::max(d, std::abs(fa - fb));
  }
  double en = std::sqrt(na * nb / (na + nb));
  return {d, kolmogorov_q((en + 0.12 + 0.11 / en) * d)};
}

TestResult chi_square_gof(const std::vector<double>& observed, const std::vector<double>& expected,
                          int fitted) {
  require(observed.size() == expected.size(), ErrorKind::length_mismatch, "chi_square_gof: lengths");
  int dof = static_cast<int>(observed.size()) - 1 - fitted;
  require(dof >= 1, ErrorKind::domain, "chi_square_gof: no degrees of freedom");
  double s = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    require(expected[i] > 0, ErrorKind::domain, "chi_square_gof: expected counts must be > 0");
    double d = observed[i] - expected[i];
    s += d * d / expected[i];
  }
  boost::math::chi_squared dist(dof);
  return {s, boost::math::cdf(boost::math::complement(dist, s))};
}

MeanEstimate mean_se(const std::vector<double>& x) {
  require(!x.empty(), ErrorKind::domain, "mean_se: empty sample");
  const double n = static_cast<double>(x.size());
  double m = 0;
  for (double v : x) m += v;
  m /= n;
  double ss = 0;
  for (double v : x) ss += (v - m) * (v - m);
  double var = x.size() > 1 ? ss / (n - 1) : 0.0;
  return {m, std::sqrt(var / n)};
}

std::vector<LtPoint> empirical_lt(const std::vector<double>& sample, const std::vector<double>& args) {
  std::vector<LtPoint> out;
  std::vector<double> e(sample.size());
  for (double a : args) {
    require(a >= 0, ErrorKind::domain, "empirical_lt: args must be >= 0");
    if (a == 0) {
      out.push_back({0, 1, 0});
      continue;
    }
    for (std::size_t i = 0; i < sample.size(); ++i) e[i] = std::exp(-a * sample[i]);
    auto m = mean_se(e);
    out.push_back({a, m.mean, m.stderr});
  }
  return out;
}

LtPoint weighted_lt(const std::vector<double>& sample, const std::vector<double>& w, double arg) {
  require(sample.size() == w.size(), ErrorKind::length_mismatch, "weighted_lt: lengths");
  double sw = 0, swe = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    sw += w[i];
    swe += w[i] * std::exp(-arg * sample[i]);
  }
  require(sw > 0, ErrorKind::weight_collapse, "weighted_lt: zero total weight");
  double est = swe / sw;
  double v = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    double d = w[i] * (std::exp(-arg * sample[i]) - est);
    v += d * d;
  }
  return {arg, est, std::sqrt(v) / sw};
}

double distance_correlation(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size(), ErrorKind::length_mismatch, "distance_correlation: lengths");
  auto xo = order_of(x), yo = order_of(y);
  auto a = row_sums(x), b = row_sums(y);
  double vxy = dcov2(x, y, xo, a, b);
  double vxx = dcov2(x, x, xo, a, a);
  double vyy = dcov2(y, y, yo, b, b);
  if (vxx <= 0 || vyy <= 0) return 0;
  return std::max(0.0, vxy) / std::sqrt(vxx * vyy);
}

std::vector<PairTest> independence_test(const std::vector<std::vector<double>>& columns,
                                        RngStream rng, int permutations) {
  require(columns.size() >= 2, ErrorKind::domain, "independence_test: need two columns");
  const std::size_t n = columns[0].size();
  for (const auto& c : columns)
    require(c.size() == n, ErrorKind::length_mismatch, "independence_test: column lengths differ");
  require(n >= 100, ErrorKind::domain, "independence_test: need n >= 100");
  std::vector<PairTest> out;
  for (std::size_t i = 0; i < columns.size(); ++i)
    for (std::size_t j = i + 1; j < columns.size(); ++j) {
      const auto& x = columns[i];
      const auto& y = columns[j];
      auto xo = order_of(x), yo = order_of(y);
      auto a = row_sums(x), b = row_sums(y);
      double norm = std::sqrt(dcov2(x, x, xo, a, a) * dcov2(y, y, yo, b, b));
      double obs = norm > 0 ? dcov2(x, y, xo, a, b) / norm : 0;
      RngStream pr = rng.substream(i * 1000 + j);
      std::vector<std::size_t> perm(n);
      std::iota(perm.begin(), perm.end(), 0);
      std::vector<double> yp(n), bp(n);
      int exceed = 0;
      for (int k = 0; k < permutations; ++k) {
        for (std::size_t m = n - 1; m > 0; --m) {
          std::size_t r = static_cast<std::size_t>(pr.uniform() * (m + 1));
          std::swap(perm[m], perm[std::min(r, m)]);
        }
        for (std::size_t m = 0; m < n; ++m) {
          yp[m] = y[perm[m]];
          bp[m] = b[perm[m]];
        }
        double st = norm > 0 ? dcov2(x, yp, xo, a, bp) / norm : 0;
        if (st >= obs) ++exceed;
      }
      out.push_back({i, j, obs, (1.0 + exceed) / (1.0 + permutations)});
    }
  return out;
}

MomentCheck moment_check(const std::vector<double>& sample, int p, double target, double tol_se) {
  require(p >= 1, ErrorKind::domain, "moment_check: p must be >= 1");
  std::vector<double> xp(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i) xp[i] = std::pow(sample[i], p);
  auto m = mean_se(xp);
  double z = m.stderr > 0 ? (m.mean - target) / m.stderr : (m.mean == target ? 0 : INFINITY);
  return {std::abs(z) <= tol_se, z, m.mean, m.stderr};
}

EmpiricalSummary summarize(const std::vector<double>& sample, const std::vector<double>& lt_args) {
  require(!sample.empty(), ErrorKind::domain, "summarize: empty sample");
  EmpiricalSummary s;
  s.n = sample.size();
  auto m = mean_se(sample);
  s.mean = m.mean;
  s.variance = m.stderr * m.stderr * static_cast<double>(s.n);
  s.lt_points = empirical_lt(sample, lt_args);
  return s;
}

Check make_check(std::string name, double estimate, double stderr, double oracle,
                 double bias_budget, double tol_se) {
  Check c;
  c.name = std::move(name);
  c.estimate = estimate;
  c.stderr = stderr;
  c.oracle = oracle;
  c.bias_budget = bias_budget;
  c.tol_se = tol_se;
  c.pass = std::abs(estimate - oracle) <= tol_se * stderr + bias_budget;
  return c;
}

Check make_test(std::string name, const TestResult& r, double level) {
  Check c;
  c.name = std::move(name);
  c.estimate = r.p_value;
  c.oracle = level;
  c.p_value = r.p_value;
  c.statistic = r.statistic;
  c.pass = r.p_value > level;
  return c;
}

std::string digest(const std::vector<double>& x) {
  std::uint64_t h = 1469598103934665603ULL;
  for (double v : x) {
    unsigned char b[sizeof(double)];
    std::memcpy(b, &v, sizeof v);
    for (unsigned char c : b) {
      h ^= c;
      h *= 1099511628211ULL;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

nlohmann::json to_json(const Check& c) {
  nlohmann::json j{{"test", c.name},     {"estimate", c.estimate}, {"stderr", c.stderr},
                   {"oracle", c.oracle}, {"bias_budget", c.bias_budget}, {"budget", c.tol_se * c.stderr + c.bias_budget},
                   {"pass", c.pass}};
  j["p_value"] = c.p_value ? nlohmann::json(*c.p_value) : nlohmann::json(nullptr);
  j["statistic"] = c.statistic ? nlohmann::json(*c.statistic) : nlohmann::json(nullptr);
  j["inputs_digest"] = c.digest;
  return j;
}

nlohmann::json to_json(const EmpiricalSummary& s) {
  nlohmann::json j{{"n", s.n}, {"mean", s.mean}, {"variance", s.variance}};
  j["lt_points"] = nlohmann::json::array();
  for (const auto& p : s.lt_points)
    j["lt_points"].push_back({{"arg", p.arg}, {"estimate", p.estimate}, {"stderr", p.stderr}});
  if (s.ks) j["ks"] = {{"statistic", s.ks->statistic}, {"p_value", s.ks->p_value}};
  for (const auto& [k, v] : s.extra) j["extra"][k] = v;
  return j;
}

}  // namespace hpl::stats
