#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "hpl/error.hpp"
#include "hpl/experiments.hpp"

using namespace hpl;
using namespace hpl::cli;
namespace fs = std::filesystem;

namespace {
fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("hpl_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig small_hull(int workers) {
  ExperimentConfig c;
  c.experiment = "hull-exact";
  c.replicates = 2000;
  c.workers = workers;
  c.params = {{"independence_n", "300"}, {"permutations", "20"}};
  return c;
}
}  // namespace

TEST(ParamReader, SectionLookupAndFinish) {
  Params p{{"hull.r", "2"}, {"n", "7"}, {"list", "1, 2.5,3"}, {"flag", "true"}};
  ParamReader a(p, "hull");
  EXPECT_EQ(a.num("r", 1), 2);
  EXPECT_EQ(a.count("n", 0), 7u);
  EXPECT_EQ(a.list("list", {}), (std::vector<double>{1, 2.5, 3}));
  EXPECT_TRUE(a.flag("flag", false));
  EXPECT_EQ(a.num("missing", 4), 4);
  EXPECT_NO_THROW(a.finish());
  ParamReader b(p, "hull");
  b.num("r", 1);
  EXPECT_THROW(b.finish(), Error);
  Params shadow{{"hull.r", "2"}, {"r", "5"}};
  ParamReader g(shadow, "snake");
  EXPECT_EQ(g.num("r", 1), 5);
  Params bad{{"x", "abc"}};
  ParamReader c(bad, "s");
  EXPECT_THROW(c.num("x", 0), Error);
}

TEST(Config, IniFlattening) {
  auto d = scratch("ini");
  std::ofstream(d / "c.ini") << "seed = 4\n[hull]\nr = 1.5\n[snake]\ny = -1\n";
  auto p = load_config_file((d / "c.ini").string());
  EXPECT_EQ(p.at("seed"), "4");
  EXPECT_EQ(p.at("hull.r"), "1.5");
  EXPECT_EQ(p.at("snake.y"), "-1");
  EXPECT_THROW(load_config_file((d / "missing.ini").string()), Error);
}

TEST(Config, Validation) {
  ExperimentConfig c;
  c.experiment = "nope";
  EXPECT_THROW(validate(c), Error);
  c.experiment = "eval";
  c.workers = 0;
  EXPECT_THROW(validate(c), Error);
  EXPECT_FALSE(experiment_names().empty());
}

TEST(Experiments, UnknownParameterRejected) {
  ExperimentConfig c;
  c.experiment = "eval";
  c.params = {{"formula", "psi"}, {"bogus", "1"}};
  EXPECT_THROW(run_experiment(c), Error);
}

TEST(Experiments, EvalPsi) {
  ExperimentConfig c;
  c.experiment = "eval";
  c.params = {{"formula", "psi"}, {"q", "0.5"}};
  auto r = run_experiment(c);
  EXPECT_TRUE(r.all_pass());
  EXPECT_EQ(r.checks.size(), 1u);
}

TEST(Experiments, SameSeedSameSummary) {
  auto a = summary_json(small_hull(1), run_experiment(small_hull(1)));
  auto b = summary_json(small_hull(1), run_experiment(small_hull(1)));
  EXPECT_EQ(a.dump(), b.dump());
  auto c = small_hull(1);
  c.seed = 2;
  EXPECT_NE(a.dump(), summary_json(c, run_experiment(c)).dump());
}

TEST(Experiments, WorkerCountInvariant) {
  auto a = run_experiment(small_hull(1)), b = run_experiment(small_hull(3));
  ASSERT_EQ(a.checks.size(), b.checks.size());
  for (std::size_t i = 0; i < a.checks.size(); ++i) {
    EXPECT_EQ(a.checks[i].estimate, b.checks[i].estimate) << a.checks[i].name;
    EXPECT_EQ(a.checks[i].digest, b.checks[i].digest);
  }
}

TEST(Experiments, OutputsAndReport) {
  auto d = scratch("run");
  auto c = small_hull(1);
  c.out_dir = (d / "hull").string();
  EXPECT_EQ(run(c), 0);
  auto csv = slurp(d / "hull" / "samples.csv");
  EXPECT_EQ(csv.rfind("# schema=1\n", 0), 0u);
  auto summary = nlohmann::json::parse(slurp(d / "hull" / "summary.json"));
  ASSERT_TRUE(summary.contains("checks"));
  for (const auto& e : summary["checks"])
    for (const char* k : {"estimate", "stderr", "oracle", "bias_budget", "pass"}) EXPECT_TRUE(e.contains(k)) << k;
  auto manifest = nlohmann::json::parse(slurp(d / "hull" / "manifest.json"));
  for (const char* k : {"config", "seed", "code_version"}) EXPECT_TRUE(manifest.contains(k)) << k;

  ExperimentConfig rep;
  rep.experiment = "report";
  rep.params = {{"input", d.string()}};
  rep.out_dir = (d / "report").string();
  auto r = run_experiment(rep);
  EXPECT_EQ(r.checks.size(), summary["checks"].size());
}

TEST(Experiments, ErrorStatus) {
  auto d = scratch("err");
  ExperimentConfig c;
  c.experiment = "eval";
  c.params = {{"formula", "unknown"}};
  c.out_dir = d.string();
  EXPECT_EQ(run(c), 2);
}
