#pragma once

#include <Eigen/Core>

namespace sngca {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

}  // namespace sngca
