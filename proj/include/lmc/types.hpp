#pragma once

#include <vector>
#include <Eigen/Dense>

namespace lmc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Rank-3 tensor stored as a vector of matrices, indexed by the first slot.
using Tensor3 = std::vector<Matrix>;

}  // namespace lmc
