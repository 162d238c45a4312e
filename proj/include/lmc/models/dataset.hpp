#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lmc/types.hpp"

namespace lmc {

// Tabular data shared by the model families. For supervised data the label
// lives in y and X holds the covariates; observation-only data (mixture and
// regression-response samples) is stored as a single column in X with y empty.
struct Dataset {
  std::string name;
  Matrix x;
  Vector y;
  std::vector<std::string> columns;
  std::string provenance;  // "file:<path>" or "synth:<family>:..."

  Eigen::Index rows() const { return x.rows(); }
  bool has_labels() const { return y.size() > 0; }
};

// Reads a CSV file with a header row. With two or more columns the last
// column is the label; a single column is observation-only data.
// Throws ParseError on malformed input.
Dataset load_dataset(const std::string& path);

void write_dataset_csv(const Dataset& data, const std::string& path);

// Binary classification data: covariates are iid standard normal, the true
// coefficient vector (intercept included) is drawn from N(0, coef_var I),
// and labels are Bernoulli through the logistic link.
Dataset synthesize_logreg(int n, int d, std::uint64_t seed, double coef_var = 1.0);

// Observations y_i = mu + sigma_y * z_i for the curved regression target;
// mu = 1 matches a unit-norm nonlinear mean.
Dataset synthesize_banana(int n, std::uint64_t seed, double mu = 1.0, double sigma_y = 2.0);

// Draws from one of the named normal-mixture densities:
// kurtotic, bimodal, skewed, trimodal, claw.
Dataset synthesize_gmm(const std::string& family, int n, std::uint64_t seed);

// Component count conventionally used to fit each named mixture family.
int gmm_family_components(const std::string& family);

}  // namespace lmc
