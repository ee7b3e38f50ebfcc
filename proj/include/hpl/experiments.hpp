#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "hpl/stats.hpp"

namespace hpl::cli {

using Params = std::map<std::string, std::string>;

struct ExperimentConfig {
  std::string experiment;
  Params params;
  std::uint64_t seed = 1;
  std::size_t replicates = 0;  // 0 selects the experiment default
  int workers = 1;
  std::string out_dir = ".";
};

const std::vector<std::string>& experiment_names();
void validate(const ExperimentConfig& cfg);

// Typed access to experiment parameters. A key `k` in section `s` is looked up
// as `s.k` and then as `k`; keys never read are rejected by finish().
class ParamReader {
 public:
  ParamReader(const Params& p, std::string section) : p_(p), section_(std::move(section)) {}
  double num(const std::string& key, double def);
  std::size_t count(const std::string& key, std::size_t def);
  std::string str(const std::string& key, const std::string& def);
  std::vector<double> list(const std::string& key, const std::vector<double>& def);
  bool flag(const std::string& key, bool def);
  void finish() const;

 private:
  const std::string* find(const std::string& key);
  const Params& p_;
  std::string section_;
  std::set<std::string> used_;
};

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;  // NaN cells are written empty
};

struct ExperimentResult {
  std::vector<stats::Check> checks;
  Table samples;
  nlohmann::json diagnostics = nlohmann::json::object();
  bool all_pass() const;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Flattens an INI file ("[section]" then "key = value") into dotted keys.
Params load_config_file(const std::string& path);

const char* code_version();

nlohmann::json summary_json(const ExperimentConfig& cfg, const ExperimentResult& r);
nlohmann::json manifest_json(const ExperimentConfig& cfg);
void write_csv(const std::string& path, const Table& t);

// Runs the experiment and writes samples.csv, summary.json and manifest.json
// into out_dir. Returns 0 iff every check passes; errors are reported on
// stderr as one JSON record and give status 2.
int run(const ExperimentConfig& cfg);

}  // namespace hpl::cli
