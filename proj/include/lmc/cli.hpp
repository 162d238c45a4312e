#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lmc/model.hpp"
#include "lmc/samplers.hpp"

namespace lmc::cli {

using json = nlohmann::ordered_json;

// Invalid usage or configuration; mapped to exit code 1. Anything else that
// escapes a command is a runtime failure and maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

struct ExperimentConfig {
  std::vector<json> models;    // one or more model specs
  std::vector<json> samplers;  // one or more sampler specs
  int iterations = 5000;
  int burn_in = 1000;
  std::uint64_t seed = 1;
  std::string out = "lmc-out";
  bool trace = false;
  int workers = 1;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);
std::string serialize_config(const ExperimentConfig& config);

struct BuiltModel {
  std::unique_ptr<TargetModel> model;
  std::string label;
  std::string provenance;
};

// Instantiates a model from its config object (family, data or synthesize
// block, family-specific settings). Throws ConfigError on schema problems.
BuiltModel build_model(const json& spec);

struct BuiltSampler {
  SamplerSpec spec;
  std::string label;
  // optional auto step-size search, run before the main chain
  bool tune = false;
  double tune_eps_lo = 1e-3, tune_eps_hi = 1.0;
  double tune_ap_low = 0.65, tune_ap_high = 0.90;
  int tune_pilot = 400;
  double trajectory_length = 0.0;  // > 0: n_steps follows epsilon
};

BuiltSampler build_sampler(const json& spec);

struct BenchmarkRow {
  std::string model;
  std::string method;
  bool failed = false;
  std::string note;
  double acceptance_rate = 0.0;
  double seconds_per_iteration = 0.0;
  double epsilon = 0.0;
  int n_steps = 0;
  double ess_min = 0.0, ess_median = 0.0, ess_max = 0.0;
  double min_ess_per_second = 0.0;
};

// Subcommand bodies. Each returns a process exit code and reports errors on
// stderr; overrides come in from the command line already applied to config.
int cmd_sample(const ExperimentConfig& config);
int cmd_benchmark(const ExperimentConfig& config);

struct GenDataArgs {
  std::string family;  // logreg | banana | gmm
  std::string mixture = "bimodal";
  int n = 100;
  int d = 2;
  std::uint64_t seed = 1;
  double coef_var = 1.0;
  std::string out;
};

int cmd_gen_data(const GenDataArgs& args);

// Shared formatting helpers (17 significant digits, round-trip safe).
std::string format_double(double v);
void write_matrix_csv(const Matrix& m, const std::vector<std::string>& columns,
                      const std::string& path);

std::vector<BenchmarkRow> run_benchmark_grid(const ExperimentConfig& config);

}  // namespace lmc::cli
