#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "hpl/rng.hpp"

namespace hpl::stats {

struct TestResult {
  double statistic;
  double p_value;
};

// Kolmogorov limiting survival function P(K > lambda).
double kolmogorov_q(double lambda);

TestResult ks_test(const std::vector<double>& sample, const std::function<double(double)>& cdf);
// Weighted two-sample KS; empty weight vectors mean unit weights. The
// effective sizes (sum w)^2 / sum w^2 enter the asymptotic p-value.
TestResult ks_two_sample(const std::vector<double>& a, const std::vector<double>& b,
                         const std::vector<double>& wa = {}, const std::vector<double>& wb = {});
// Pearson chi-square; dof = bins - 1 - fitted.
TestResult chi_square_gof(const std::vector<double>& observed, const std::vector<double>& expected,
                          int fitted = 0);

struct LtPoint {
  double arg;
  double estimate;
  double stderr;
};

std::vector<LtPoint> empirical_lt(const std::vector<double>& sample, const std::vector<double>& args);
// Ratio estimator sum w e^{-a x} / sum w, with a delta-method standard error.
LtPoint weighted_lt(const std::vector<double>& sample, const std::vector<double>& w, double arg);

struct MeanEstimate {
  double mean;
  double stderr;
};
MeanEstimate mean_se(const std::vector<double>& x);

// Squared sample distance correlation of two univariate columns, O(n log n).
double distance_correlation(const std::vector<double>& x, const std::vector<double>& y);

struct PairTest {
  std::size_t i, j;
  double dcor;
  double p_value;
};
std::vector<PairTest> independence_test(const std::vector<std::vector<double>>& columns,
                                        RngStream rng, int permutations = 200);

struct MomentCheck {
  bool pass;
  double z;
  double estimate;
  double stderr;
};
MomentCheck moment_check(const std::vector<double>& sample, int p, double target, double tol_se);

struct EmpiricalSummary {
  std::size_t n = 0;
  double mean = 0, variance = 0;
  std::vector<LtPoint> lt_points;
  std::optional<TestResult> ks;
  std::map<std::string, double> extra;
};
EmpiricalSummary summarize(const std::vector<double>& sample, const std::vector<double>& lt_args = {});

// Uniform acceptance rule: |estimate - oracle| <= tol_se * stderr + bias_budget.
struct Check {
  std::string name;
  double estimate = 0;
  double stderr = 0;
  double oracle = 0;
  double bias_budget = 0;
  double tol_se = 3;
  bool pass = false;
  std::optional<double> p_value;     // set for hypothesis tests
  std::optional<double> statistic;
  std::string digest;
};
Check make_check(std::string name, double estimate, double stderr, double oracle,
                 double bias_budget, double tol_se = 3);
// Hypothesis test passing when p > level.
Check make_test(std::string name, const TestResult& r, double level = 0.01);

std::string digest(const std::vector<double>& x);
nlohmann::json to_json(const Check& c);
nlohmann::json to_json(const EmpiricalSummary& s);

}  // namespace hpl::stats
