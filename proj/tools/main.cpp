#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lmc/cli.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  bool trace = false;
  std::optional<int> workers;
};

lmc::cli::ExperimentConfig load_with_overrides(const CommonFlags& flags) {
  lmc::cli::ExperimentConfig cfg = lmc::cli::parse_config_file(flags.config_path);
  if (flags.seed) cfg.seed = *flags.seed;
  if (flags.out) cfg.out = *flags.out;
  if (flags.trace) cfg.trace = true;
  if (flags.workers) {
    if (*flags.workers < 1) throw lmc::cli::ConfigError("--workers must be at least 1");
    cfg.workers = *flags.workers;
  }
  return cfg;
}

void add_common(CLI::App* cmd, CommonFlags& flags, bool with_trace) {
  cmd->add_option("config", flags.config_path, "experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", flags.seed, "override the config seed");
  cmd->add_option("--out", flags.out, "override the output directory");
  cmd->add_option("--workers", flags.workers, "parallel benchmark workers");
  if (with_trace) cmd->add_flag("--trace", flags.trace, "record per-step positions");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"geometric MCMC sampling and benchmarking"};
  app.require_subcommand(1);

  CommonFlags sample_flags, bench_flags;
  lmc::cli::GenDataArgs gen_args;

  CLI::App* sample = app.add_subcommand("sample", "run one chain and write draws");
  add_common(sample, sample_flags, true);

  CLI::App* bench = app.add_subcommand("benchmark", "run a model x sampler grid");
  add_common(bench, bench_flags, false);

  CLI::App* gen = app.add_subcommand("gen-data", "write a synthetic dataset");
  gen->add_option("--family", gen_args.family, "logreg | banana | gmm")->required();
  gen->add_option("--mixture", gen_args.mixture,
                  "gmm only: kurtotic | bimodal | skewed | trimodal | claw");
  gen->add_option("--n", gen_args.n, "number of rows");
  gen->add_option("--d", gen_args.d, "logreg only: covariate count");
  gen->add_option("--seed", gen_args.seed, "generator seed");
  gen->add_option("--coef-var", gen_args.coef_var, "logreg only: coefficient prior variance");
  gen->add_option("--out", gen_args.out, "output CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? lmc::cli::kExitOk : lmc::cli::kExitConfig;
  }

  try {
    if (sample->parsed()) return lmc::cli::cmd_sample(load_with_overrides(sample_flags));
    if (bench->parsed()) return lmc::cli::cmd_benchmark(load_with_overrides(bench_flags));
    if (gen->parsed()) return lmc::cli::cmd_gen_data(gen_args);
  } catch (const lmc::cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return lmc::cli::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return lmc::cli::kExitRuntime;
  }
  return lmc::cli::kExitConfig;
}
