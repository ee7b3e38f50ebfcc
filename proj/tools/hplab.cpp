#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "hpl/error.hpp"
#include "hpl/experiments.hpp"

namespace {

using hpl::cli::ExperimentConfig;
using hpl::cli::Params;

int config_error(const std::string& msg) {
  std::cerr << nlohmann::json{{"error", "config"}, {"message", msg}}.dump() << '\n';
  return 2;
}

// Remaining arguments are experiment parameters: --key value or --key=value.
Params parse_params(const std::vector<std::string>& extra) {
  Params p;
  for (std::size_t i = 0; i < extra.size(); ++i) {
    const std::string& a = extra[i];
    if (a.rfind("--", 0) != 0 || a.size() < 3)
      hpl::fail(hpl::ErrorKind::config, "unexpected argument: " + a);
    std::string key = a.substr(2), value;
    auto eq = key.find('=');
    if (eq != std::string::npos) {
      value = key.substr(eq + 1);
      key = key.substr(0, eq);
    } else {
      if (i + 1 >= extra.size()) hpl::fail(hpl::ErrorKind::config, "missing value for --" + key);
      value = extra[++i];
    }
    p[key] = value;
  }
  return p;
}

template <class T>
T take(Params& p, const std::string& key, T def) {
  for (const std::string& k : {key, "run." + key}) {
    auto it = p.find(k);
    if (it == p.end()) continue;
    std::string v = it->second;
    p.erase(it);
    try {
      if constexpr (std::is_same_v<T, std::string>) return v;
      else return static_cast<T>(std::stoull(v));
    } catch (const std::exception&) {
      hpl::fail(hpl::ErrorKind::config, "bad value for " + key + ": " + v);
    }
  }
  return def;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo laboratory for the Brownian half-plane"};
  app.allow_extras();
  std::vector<std::string> positional;
  std::string config_file;
  std::uint64_t seed = 0;
  std::size_t replicates = 0;
  int workers = 0;
  std::string out;
  bool list = false;
  app.footer("usage: hplab [run] <experiment> [--section.key value ...]");
  app.add_option("--config", config_file, "INI file with experiment parameters");
  auto* o_seed = app.add_option("--seed", seed, "64-bit seed");
  auto* o_rep = app.add_option("--replicates", replicates, "number of replicates");
  auto* o_work = app.add_option("--workers", workers, "worker threads (HALFPLANE_LAB_THREADS overrides)");
  auto* o_out = app.add_option("--out", out, "output directory");
  app.add_flag("--list", list, "list experiments");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  if (list) {
    for (const auto& n : hpl::cli::experiment_names()) std::puts(n.c_str());
    return 0;
  }

  ExperimentConfig cfg;
  try {
    Params file;
    if (!config_file.empty()) file = hpl::cli::load_config_file(config_file);
    std::vector<std::string> rest = app.remaining();
    std::size_t k = 0;
    while (k < rest.size() && rest[k].rfind("--", 0) != 0) positional.push_back(rest[k++]);
    Params flags = parse_params({rest.begin() + static_cast<std::ptrdiff_t>(k), rest.end()});
    if (!positional.empty() && positional.front() == "run") positional.erase(positional.begin());
    if (positional.size() > 1) return config_error("expected a single experiment name");

    cfg.experiment = take<std::string>(file, "experiment", "");
    cfg.seed = take<std::uint64_t>(file, "seed", 1);
    cfg.replicates = take<std::size_t>(file, "replicates", 0);
    cfg.workers = static_cast<int>(take<std::size_t>(file, "workers", 1));
    cfg.out_dir = take<std::string>(file, "out_dir", "");
    cfg.params = file;
    for (const auto& [k, v] : flags) cfg.params[k] = v;

    if (!positional.empty()) cfg.experiment = positional.front();
    if (*o_seed) cfg.seed = seed;
    if (*o_rep) cfg.replicates = replicates;
    if (*o_work) cfg.workers = workers;
    if (*o_out) cfg.out_dir = out;
    if (cfg.experiment.empty()) return config_error("no experiment given; use --list");
    if (cfg.out_dir.empty()) cfg.out_dir = "results/" + cfg.experiment;
    hpl::cli::validate(cfg);
  } catch (const hpl::Error& e) {
    return config_error(e.what());
  }
  return hpl::cli::run(cfg);
}
