#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace msopt {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Boolean mask over the coordinates of an iterate; true marks a free
/// coordinate that an update is allowed to change.
using Mask = std::vector<bool>;

}  // namespace msopt
