#include "lmc/models/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "lmc/errors.hpp"
#include "lmc/rng.hpp"

namespace lmc {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  const char* begin = s.data();
  const char* end = begin + s.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (end[-1] == ' ' || end[-1] == '\t' || end[-1] == '\r')) --end;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    throw ParseError("bad numeric field '" + s + "' in " + where);
  return value;
}

struct MixtureSpec {
  std::vector<double> weight, mean, sd;
};

MixtureSpec mixture_spec(const std::string& family) {
  if (family == "kurtotic")
    return {{2.0 / 3.0, 1.0 / 3.0}, {0.0, 0.0}, {1.0, 0.1}};
  if (family == "bimodal")
    return {{0.5, 0.5}, {-1.0, 1.0}, {2.0 / 3.0, 2.0 / 3.0}};
  if (family == "skewed")
    return {{0.75, 0.25}, {0.0, 1.5}, {1.0, 1.0 / 3.0}};
  if (family == "trimodal")
    return {{0.45, 0.45, 0.1}, {-1.2, 1.2, 0.0}, {0.6, 0.6, 0.25}};
  if (family == "claw")
    return {{0.5, 0.1, 0.1, 0.1, 0.1, 0.1},
            {0.0, -1.0, -0.5, 0.0, 0.5, 1.0},
            {1.0, 0.1, 0.1, 0.1, 0.1, 0.1}};
  throw ParseError("unknown mixture family '" + family + "'");
}

}  // namespace

Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open dataset file '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty dataset file '" + path + "'");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_csv_line(line);
  const std::size_t ncol = header.size();
  if (ncol == 0) throw ParseError("empty header in '" + path + "'");

  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != ncol)
      throw ParseError(path + ":" + std::to_string(lineno) + ": expected " +
                       std::to_string(ncol) + " fields, got " + std::to_string(fields.size()));
    std::vector<double> row(ncol);
    for (std::size_t j = 0; j < ncol; ++j)
      row[j] = parse_double(fields[j], path + ":" + std::to_string(lineno));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("no data rows in '" + path + "'");

  Dataset data;
  data.name = path;
  data.columns = header;
  data.provenance = "file:" + path;
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  if (ncol == 1) {
    data.x.resize(n, 1);
    for (Eigen::Index i = 0; i < n; ++i) data.x(i, 0) = rows[i][0];
  } else {
    data.x.resize(n, static_cast<Eigen::Index>(ncol - 1));
    data.y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (std::size_t j = 0; j + 1 < ncol; ++j) data.x(i, static_cast<Eigen::Index>(j)) = rows[i][j];
      data.y[i] = rows[i][ncol - 1];
    }
  }
  return data;
}

void write_dataset_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  std::vector<std::string> cols = data.columns;
  const std::size_t want = static_cast<std::size_t>(data.x.cols()) + (data.has_labels() ? 1 : 0);
  if (cols.size() != want) {
    cols.clear();
    for (Eigen::Index j = 0; j < data.x.cols(); ++j) cols.push_back("x" + std::to_string(j));
    if (data.has_labels()) cols.push_back("y");
  }
  for (std::size_t j = 0; j < cols.size(); ++j) out << (j ? "," : "") << cols[j];
  out << "\n";
  char buf[64];
  auto put = [&](double v, bool lead_comma) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    if (lead_comma) out << ",";
    out << buf;
  };
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.x.cols(); ++j) put(data.x(i, j), j > 0);
    if (data.has_labels()) put(data.y[i], data.x.cols() > 0);
    out << "\n";
  }
  if (!out) throw ParseError("write failed for '" + path + "'");
}

Dataset synthesize_logreg(int n, int d, std::uint64_t seed, double coef_var) {
  if (n < 1 || d < 1) throw DimensionMismatch("synthesize_logreg needs n >= 1, d >= 1");
  Rng rng(mix_seed(seed, 0x1061));
  Dataset data;
  data.x.resize(n, d);
  data.y.resize(n);
  Vector coef = std::sqrt(coef_var) * rng.normal_vector(d + 1);  // intercept first
  for (int i = 0; i < n; ++i) {
    double lin = coef[0];
    for (int j = 0; j < d; ++j) {
      const double xij = rng.normal();
      data.x(i, j) = xij;
      lin += coef[j + 1] * xij;
    }
    const double prob = 1.0 / (1.0 + std::exp(-lin));
    data.y[i] = rng.uniform01() < prob ? 1.0 : 0.0;
  }
  for (int j = 0; j < d; ++j) data.columns.push_back("x" + std::to_string(j));
  data.columns.push_back("y");
  data.name = "logreg-synth";
  data.provenance = "synth:logreg:n=" + std::to_string(n) + ":d=" + std::to_string(d) +
                    ":seed=" + std::to_string(seed);
  return data;
}

Dataset synthesize_banana(int n, std::uint64_t seed, double mu, double sigma_y) {
  if (n < 1) throw DimensionMismatch("synthesize_banana needs n >= 1");
  Rng rng(mix_seed(seed, 0x2062));
  Dataset data;
  data.x.resize(n, 1);
  for (int i = 0; i < n; ++i) data.x(i, 0) = mu + sigma_y * rng.normal();
  data.columns = {"y"};
  data.name = "banana-synth";
  data.provenance = "synth:banana:n=" + std::to_string(n) + ":seed=" + std::to_string(seed);
  return data;
}

Dataset synthesize_gmm(const std::string& family, int n, std::uint64_t seed) {
  if (n < 1) throw DimensionMismatch("synthesize_gmm needs n >= 1");
  const MixtureSpec spec = mixture_spec(family);
  Rng rng(mix_seed(seed, 0x3063));
  Dataset data;
  data.x.resize(n, 1);
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform01();
    double acc = 0.0;
    std::size_t k = 0;
    for (; k + 1 < spec.weight.size(); ++k) {
      acc += spec.weight[k];
      if (u < acc) break;
    }
    data.x(i, 0) = spec.mean[k] + spec.sd[k] * rng.normal();
  }
  data.columns = {"x"};
  data.name = "gmm-" + family;
  data.provenance = "synth:gmm:" + family + ":n=" + std::to_string(n) +
                    ":seed=" + std::to_string(seed);
  return data;
}

int gmm_family_components(const std::string& family) {
  return static_cast<int>(mixture_spec(family).weight.size());
}

}  // namespace lmc
