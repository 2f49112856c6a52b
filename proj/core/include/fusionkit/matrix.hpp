#pragma once

#include <Eigen/Dense>

namespace fusionkit {

// Row-major: one sample per contiguous row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

}  // namespace fusionkit
