#include "lmc/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "lmc/errors.hpp"
#include "lmc/models/banana.hpp"
#include "lmc/models/dataset.hpp"
#include "lmc/models/gmm.hpp"
#include "lmc/models/logistic.hpp"

namespace lmc::cli {

namespace {

void require_keys(const json& obj, const std::string& where,
                  std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* a) { return key == a; }) == allowed.end())
      throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

double get_num(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) throw ConfigError(std::string("'") + key + "' must be a number");
  return obj[key].get<double>();
}

int get_int(const json& obj, const char* key, int fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer())
    throw ConfigError(std::string("'") + key + "' must be an integer");
  return obj[key].get<int>();
}

std::string get_str(const json& obj, const char* key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_string()) throw ConfigError(std::string("'") + key + "' must be a string");
  return obj[key].get<std::string>();
}

bool get_bool(const json& obj, const char* key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_boolean()) throw ConfigError(std::string("'") + key + "' must be a boolean");
  return obj[key].get<bool>();
}

Dataset dataset_for(const json& spec, const std::string& family) {
  const bool has_file = spec.contains("data");
  const bool has_synth = spec.contains("synthesize");
  if (has_file == has_synth)
    throw ConfigError("model '" + family + "' needs exactly one of 'data' or 'synthesize'");
  if (has_file) return load_dataset(spec["data"].get<std::string>());

  const json& syn = spec["synthesize"];
  require_keys(syn, "synthesize", {"n", "d", "seed", "family", "coef_var", "mu", "sigma_y"});
  const int n = get_int(syn, "n", 100);
  const auto seed = static_cast<std::uint64_t>(get_int(syn, "seed", 1));
  if (family == "logistic")
    return synthesize_logreg(n, get_int(syn, "d", 2), seed, get_num(syn, "coef_var", 1.0));
  if (family == "banana")
    return synthesize_banana(n, seed, get_num(syn, "mu", 1.0), get_num(syn, "sigma_y", 2.0));
  if (family == "gmm") return synthesize_gmm(get_str(syn, "family", "bimodal"), n, seed);
  throw ConfigError("no synthesizer for family '" + family + "'");
}

std::string default_label(const json& spec, const std::string& family, const Dataset& data) {
  const std::string name = get_str(spec, "name", "");
  if (!name.empty()) return name;
  if (spec.contains("synthesize") && family == "gmm")
    return "gmm-" + get_str(spec["synthesize"], "family", "bimodal");
  if (spec.contains("data")) {
    const std::string stem = std::filesystem::path(data.name).stem().string();
    return family + ":" + stem;
  }
  return family;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

BuiltModel build_model(const json& spec) {
  if (!spec.is_object()) throw ConfigError("model spec must be an object");
  const std::string family = get_str(spec, "family", "");
  if (family.empty()) throw ConfigError("model spec is missing 'family'");

  BuiltModel out;
  if (family == "logistic") {
    require_keys(spec, "logistic model",
                 {"family", "name", "data", "synthesize", "alpha", "standardize"});
    const Dataset data = dataset_for(spec, family);
    out.model = std::make_unique<LogisticRegressionModel>(LogisticRegressionModel::from_dataset(
        data, get_num(spec, "alpha", 100.0), get_bool(spec, "standardize", true)));
    out.provenance = data.provenance;
    out.label = default_label(spec, family, data);
  } else if (family == "banana") {
    require_keys(spec, "banana model",
                 {"family", "name", "data", "synthesize", "sigma_y", "sigma_theta"});
    const Dataset data = dataset_for(spec, family);
    out.model = std::make_unique<BananaModel>(BananaModel::from_dataset(
        data, get_num(spec, "sigma_y", 2.0), get_num(spec, "sigma_theta", 1.0)));
    out.provenance = data.provenance;
    out.label = default_label(spec, family, data);
  } else if (family == "gmm") {
    require_keys(spec, "gmm model",
                 {"family", "name", "data", "synthesize", "components", "lambda", "beta",
                  "ig_shape", "mean_loc", "ig_scale"});
    const Dataset data = dataset_for(spec, family);
    int k = get_int(spec, "components", 0);
    if (k == 0 && spec.contains("synthesize"))
      k = gmm_family_components(get_str(spec["synthesize"], "family", "bimodal"));
    if (k < 2) throw ConfigError("gmm needs 'components' >= 2");
    GaussianMixtureModel::Prior prior;
    prior.lambda = get_num(spec, "lambda", 1.0);
    prior.beta = get_num(spec, "beta", 1.0);
    prior.ig_shape = get_num(spec, "ig_shape", 2.0);
    if (spec.contains("mean_loc")) prior.mean_loc = get_num(spec, "mean_loc", 0.0);
    if (spec.contains("ig_scale")) prior.ig_scale = get_num(spec, "ig_scale", 1.0);
    out.model = std::make_unique<GaussianMixtureModel>(
        GaussianMixtureModel::from_dataset(data, k, prior));
    out.provenance = data.provenance;
    out.label = default_label(spec, family, data);
  } else {
    throw ConfigError("unknown model family '" + family + "'");
  }
  return out;
}

BuiltSampler build_sampler(const json& spec) {
  if (!spec.is_object()) throw ConfigError("sampler spec must be an object");
  require_keys(spec, "sampler spec",
               {"method", "epsilon", "steps", "trajectory_length", "fp_tol", "fp_max",
                "fp_fixed", "mass", "volume_correction", "tune"});
  const std::string name = get_str(spec, "method", "");
  const auto method = parse_method(name);
  if (!method) throw ConfigError("unknown sampler method '" + name + "'");

  BuiltSampler out;
  out.spec.method = *method;
  out.label = name;
  out.spec.integ.epsilon = get_num(spec, "epsilon", 0.1);
  out.spec.integ.n_steps = get_int(spec, "steps", 10);
  out.spec.integ.fp_tol = get_num(spec, "fp_tol", 1e-10);
  out.spec.integ.fp_max = get_int(spec, "fp_max", 100);
  out.spec.integ.fp_fixed_count = get_int(spec, "fp_fixed", 0);
  out.spec.volume_correction = get_bool(spec, "volume_correction", true);
  out.trajectory_length = get_num(spec, "trajectory_length", 0.0);
  if (out.spec.integ.epsilon <= 0.0) throw ConfigError("'epsilon' must be positive");
  if (out.spec.integ.n_steps < 1) throw ConfigError("'steps' must be at least 1");

  if (spec.contains("mass")) {
    if (!spec["mass"].is_array()) throw ConfigError("'mass' must be an array");
    Vector mass(spec["mass"].size());
    Eigen::Index i = 0;
    for (const auto& v : spec["mass"]) {
      if (!v.is_number() || v.get<double>() <= 0.0)
        throw ConfigError("'mass' entries must be positive numbers");
      mass[i++] = v.get<double>();
    }
    out.spec.mass_diag = std::move(mass);
  }

  if (spec.contains("tune")) {
    const json& t = spec["tune"];
    if (t.is_boolean()) {
      out.tune = t.get<bool>();
    } else if (t.is_object()) {
      require_keys(t, "tune block", {"eps_lo", "eps_hi", "ap_low", "ap_high", "pilot"});
      out.tune = true;
      out.tune_eps_lo = get_num(t, "eps_lo", 1e-3);
      out.tune_eps_hi = get_num(t, "eps_hi", 1.0);
      out.tune_ap_low = get_num(t, "ap_low", 0.65);
      out.tune_ap_high = get_num(t, "ap_high", 0.90);
      out.tune_pilot = get_int(t, "pilot", 400);
      if (!(out.tune_eps_lo > 0.0 && out.tune_eps_hi > out.tune_eps_lo))
        throw ConfigError("tune needs 0 < eps_lo < eps_hi");
    } else {
      throw ConfigError("'tune' must be true, false, or an object");
    }
  }

  if (out.trajectory_length > 0.0)
    out.spec.integ.n_steps = std::max(
        1, static_cast<int>(std::lround(out.trajectory_length / out.spec.integ.epsilon)));
  return out;
}

ExperimentConfig parse_config_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config root must be an object");
  require_keys(root, "config",
               {"model", "models", "sampler", "samplers", "iterations", "burn_in", "seed",
                "out", "trace", "workers"});

  ExperimentConfig cfg;
  if (root.contains("model") == root.contains("models"))
    throw ConfigError("config needs exactly one of 'model' or 'models'");
  if (root.contains("sampler") == root.contains("samplers"))
    throw ConfigError("config needs exactly one of 'sampler' or 'samplers'");

  if (root.contains("model")) {
    cfg.models.push_back(root["model"]);
  } else {
    if (!root["models"].is_array() || root["models"].empty())
      throw ConfigError("'models' must be a nonempty array");
    for (const auto& m : root["models"]) cfg.models.push_back(m);
  }
  if (root.contains("sampler")) {
    cfg.samplers.push_back(root["sampler"]);
  } else {
    if (!root["samplers"].is_array() || root["samplers"].empty())
      throw ConfigError("'samplers' must be a nonempty array");
    for (const auto& s : root["samplers"]) cfg.samplers.push_back(s);
  }

  cfg.iterations = get_int(root, "iterations", 5000);
  cfg.burn_in = get_int(root, "burn_in", std::min(1000, cfg.iterations / 5));
  cfg.seed = static_cast<std::uint64_t>(get_int(root, "seed", 1));
  cfg.out = get_str(root, "out", "lmc-out");
  cfg.trace = get_bool(root, "trace", false);
  cfg.workers = get_int(root, "workers", 1);
  if (cfg.iterations <= cfg.burn_in || cfg.burn_in < 0)
    throw ConfigError("need iterations > burn_in >= 0");
  if (cfg.workers < 1) throw ConfigError("'workers' must be at least 1");

  // validate the pieces eagerly so schema errors surface as config errors
  for (const auto& s : cfg.samplers) build_sampler(s);
  for (const auto& m : cfg.models) {
    if (!m.is_object() || !m.contains("family"))
      throw ConfigError("each model spec needs a 'family'");
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string serialize_config(const ExperimentConfig& config) {
  json root;
  if (config.models.size() == 1)
    root["model"] = config.models[0];
  else
    root["models"] = config.models;
  if (config.samplers.size() == 1)
    root["sampler"] = config.samplers[0];
  else
    root["samplers"] = config.samplers;
  root["iterations"] = config.iterations;
  root["burn_in"] = config.burn_in;
  root["seed"] = config.seed;
  root["out"] = config.out;
  root["trace"] = config.trace;
  root["workers"] = config.workers;
  return root.dump(2) + "\n";
}

void write_matrix_csv(const Matrix& m, const std::vector<std::string>& columns,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  for (std::size_t j = 0; j < columns.size(); ++j) out << (j ? "," : "") << columns[j];
  out << "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      out << (j ? "," : "") << format_double(m(i, j));
    out << "\n";
  }
  if (!out) throw ParseError("write failed for '" + path + "'");
}

namespace {

json summary_json(const ChainSummary& summary, const BuiltModel& model,
                  const BuiltSampler& sampler, const ExperimentConfig& config) {
  json j;
  j["model"] = model.label;
  j["provenance"] = model.provenance;
  j["method"] = sampler.label;
  j["iterations"] = config.iterations;
  j["burn_in"] = config.burn_in;
  j["seed"] = config.seed;
  j["epsilon"] = sampler.spec.integ.epsilon;
  j["steps"] = sampler.spec.integ.n_steps;
  j["volume_correction"] = sampler.spec.volume_correction;
  j["acceptance_rate"] = summary.acceptance_rate;
  j["seconds_per_iteration"] = summary.seconds_per_iteration;
  j["total_seconds"] = summary.total_seconds;
  json ess;
  ess["per_dimension"] = std::vector<double>(summary.ess.per_dimension.begin(),
                                             summary.ess.per_dimension.end());
  ess["min"] = summary.ess.min;
  ess["median"] = summary.ess.median;
  ess["max"] = summary.ess.max;
  ess["min_per_second"] = summary.ess.min_per_second;
  j["ess"] = ess;
  json diag;
  diag["divergences"] = summary.diagnostics.divergences;
  diag["metric_failures"] = summary.diagnostics.metric_failures;
  diag["singular_updates"] = summary.diagnostics.singular_updates;
  diag["fixed_point_failures"] = summary.diagnostics.fixed_point_failures;
  diag["fixed_point_iters"] = summary.diagnostics.fixed_point_iters;
  diag["jacobian_sign_flips"] = summary.diagnostics.jacobian_sign_flips;
  j["diagnostics"] = diag;
  return j;
}

void apply_tuning(const TargetModel& model, BuiltSampler& sampler) {
  if (!sampler.tune) return;
  const double eps =
      tune_step_size(model, sampler.spec, sampler.tune_eps_lo, sampler.tune_eps_hi,
                     sampler.tune_ap_low, sampler.tune_ap_high, sampler.tune_pilot, 20,
                     sampler.trajectory_length);
  sampler.spec.integ.epsilon = eps;
  if (sampler.trajectory_length > 0.0)
    sampler.spec.integ.n_steps =
        std::max(1, static_cast<int>(std::lround(sampler.trajectory_length / eps)));
}

}  // namespace

int cmd_sample(const ExperimentConfig& config) {
  if (config.models.size() != 1 || config.samplers.size() != 1)
    throw ConfigError("sample runs exactly one model and one sampler");

  BuiltModel model = build_model(config.models[0]);
  BuiltSampler sampler = build_sampler(config.samplers[0]);
  sampler.spec.seed = config.seed;
  apply_tuning(*model.model, sampler);

  TraceLog trace;
  ChainSummary summary = run_chain(*model.model, sampler.spec, config.iterations,
                                   config.burn_in, std::nullopt, config.trace ? &trace : nullptr);

  const std::filesystem::path dir(config.out);
  std::filesystem::create_directories(dir);

  std::vector<std::string> columns;
  for (int j = 0; j < model.model->dim(); ++j) columns.push_back("theta_" + std::to_string(j));
  write_matrix_csv(summary.samples, columns, (dir / "samples.csv").string());

  {
    std::ofstream out(dir / "summary.json");
    out << summary_json(summary, model, sampler, config).dump(2) << "\n";
    if (!out) throw ParseError("write failed for summary.json");
  }

  if (config.trace) {
    std::ofstream out(dir / "trace.csv");
    out << "iteration,step";
    for (const auto& c : columns) out << "," << c;
    out << "\n";
    for (std::size_t it = 0; it < trace.size(); ++it)
      for (std::size_t s = 0; s < trace[it].size(); ++s) {
        out << it << "," << s;
        for (Eigen::Index j = 0; j < trace[it][s].size(); ++j)
          out << "," << format_double(trace[it][s][j]);
        out << "\n";
      }
    if (!out) throw ParseError("write failed for trace.csv");
  }

  std::cout << "model " << model.label << ", method " << sampler.label << ": AP "
            << summary.acceptance_rate << ", s/iter " << summary.seconds_per_iteration
            << ", ESS(min/med/max) " << summary.ess.min << "/" << summary.ess.median << "/"
            << summary.ess.max << ", min(ESS)/s " << summary.ess.min_per_second << "\n"
            << "wrote " << (dir / "samples.csv").string() << "\n";
  return kExitOk;
}

std::vector<BenchmarkRow> run_benchmark_grid(const ExperimentConfig& config) {
  struct Cell {
    std::size_t model_idx, sampler_idx, flat;
  };
  std::vector<Cell> cells;
  for (std::size_t mi = 0; mi < config.models.size(); ++mi)
    for (std::size_t si = 0; si < config.samplers.size(); ++si)
      cells.push_back({mi, si, cells.size()});

  std::vector<BenchmarkRow> rows(cells.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) break;
      const Cell& cell = cells[i];
      BenchmarkRow& row = rows[cell.flat];
      try {
        BuiltModel model = build_model(config.models[cell.model_idx]);
        BuiltSampler sampler = build_sampler(config.samplers[cell.sampler_idx]);
        row.model = model.label;
        row.method = sampler.label;
        sampler.spec.seed = mix_seed(config.seed, cell.flat);
        apply_tuning(*model.model, sampler);
        const ChainSummary summary =
            run_chain(*model.model, sampler.spec, config.iterations, config.burn_in);
        row.acceptance_rate = summary.acceptance_rate;
        row.seconds_per_iteration = summary.seconds_per_iteration;
        row.epsilon = sampler.spec.integ.epsilon;
        row.n_steps = sampler.spec.integ.n_steps;
        row.ess_min = summary.ess.min;
        row.ess_median = summary.ess.median;
        row.ess_max = summary.ess.max;
        row.min_ess_per_second = summary.ess.min_per_second;
        if (summary.diagnostics.divergences > 0)
          row.note = std::to_string(summary.diagnostics.divergences) + " divergences";
      } catch (const std::exception& e) {
        row.failed = true;
        row.note = e.what();
        if (row.model.empty()) row.model = "model[" + std::to_string(cell.model_idx) + "]";
        if (row.method.empty()) row.method = "sampler[" + std::to_string(cell.sampler_idx) + "]";
      }
    }
  };

  const std::size_t n_workers =
      std::min<std::size_t>(static_cast<std::size_t>(config.workers), cells.size());
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return rows;
}

int cmd_benchmark(const ExperimentConfig& config) {
  const std::vector<BenchmarkRow> rows = run_benchmark_grid(config);

  const std::filesystem::path dir(config.out);
  std::filesystem::create_directories(dir);

  // machine-readable copies
  {
    std::ofstream out(dir / "benchmark.csv");
    out << "model,method,epsilon,steps,acceptance_rate,seconds_per_iteration,"
           "ess_min,ess_median,ess_max,min_ess_per_second,note\n";
    for (const auto& r : rows) {
      out << r.model << "," << r.method << "," << format_double(r.epsilon) << "," << r.n_steps
          << "," << format_double(r.acceptance_rate) << ","
          << format_double(r.seconds_per_iteration) << "," << format_double(r.ess_min) << ","
          << format_double(r.ess_median) << "," << format_double(r.ess_max) << ","
          << format_double(r.min_ess_per_second) << "," << (r.failed ? "FAILED: " : "")
          << r.note << "\n";
    }
    if (!out) throw ParseError("write failed for benchmark.csv");
  }
  {
    json j = json::array();
    for (const auto& r : rows) {
      json row;
      row["model"] = r.model;
      row["method"] = r.method;
      row["failed"] = r.failed;
      row["note"] = r.note;
      row["epsilon"] = r.epsilon;
      row["steps"] = r.n_steps;
      row["acceptance_rate"] = r.acceptance_rate;
      row["seconds_per_iteration"] = r.seconds_per_iteration;
      row["ess_min"] = r.ess_min;
      row["ess_median"] = r.ess_median;
      row["ess_max"] = r.ess_max;
      row["min_ess_per_second"] = r.min_ess_per_second;
      j.push_back(row);
    }
    std::ofstream out(dir / "benchmark.json");
    out << j.dump(2) << "\n";
    if (!out) throw ParseError("write failed for benchmark.json");
  }

  // aligned table, one row per cell
  auto fmt = [](double v, int prec) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*f", prec, v);
    return std::string(buf);
  };
  auto fmt_sci = [](double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return std::string(buf);
  };
  std::vector<std::vector<std::string>> table;
  table.push_back({"model", "method", "AP", "s/iter", "ESS min", "ESS med", "ESS max",
                   "min(ESS)/s", "note"});
  for (const auto& r : rows) {
    if (r.failed) {
      table.push_back({r.model, r.method, "-", "-", "-", "-", "-", "-", "FAILED: " + r.note});
    } else {
      table.push_back({r.model, r.method, fmt(r.acceptance_rate, 3),
                       fmt_sci(r.seconds_per_iteration), fmt(r.ess_min, 1),
                       fmt(r.ess_median, 1), fmt(r.ess_max, 1), fmt(r.min_ess_per_second, 2),
                       r.note});
    }
  }
  std::vector<std::size_t> width(table[0].size(), 0);
  for (const auto& row : table)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  for (const auto& row : table) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      line += row[c];
      if (c + 1 < row.size()) line += std::string(width[c] - row[c].size() + 2, ' ');
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    std::cout << line << "\n";
  }
  std::cout << "wrote " << (dir / "benchmark.csv").string() << "\n";

  for (const auto& r : rows)
    if (r.failed) return kExitRuntime;
  return kExitOk;
}

int cmd_gen_data(const GenDataArgs& args) {
  if (args.out.empty()) throw ConfigError("gen-data needs --out");
  Dataset data;
  json meta;
  if (args.family == "logreg") {
    data = synthesize_logreg(args.n, args.d, args.seed, args.coef_var);
    meta["d"] = args.d;
    meta["coef_var"] = args.coef_var;
  } else if (args.family == "banana") {
    data = synthesize_banana(args.n, args.seed);
  } else if (args.family == "gmm") {
    data = synthesize_gmm(args.mixture, args.n, args.seed);
    meta["mixture"] = args.mixture;
    meta["suggested_components"] = gmm_family_components(args.mixture);
  } else {
    throw ConfigError("unknown gen-data family '" + args.family + "' (logreg, banana, gmm)");
  }
  meta["family"] = args.family;
  meta["n"] = args.n;
  meta["seed"] = args.seed;
  meta["provenance"] = data.provenance;

  const std::filesystem::path out(args.out);
  if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
  write_dataset_csv(data, out.string());
  {
    std::ofstream mf(out.string() + ".meta.json");
    mf << meta.dump(2) << "\n";
    if (!mf) throw ParseError("write failed for metadata");
  }
  std::cout << "wrote " << out.string() << " (" << data.rows() << " rows)\n";
  return kExitOk;
}

}  // namespace lmc::cli
