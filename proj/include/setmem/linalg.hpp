#pragma once

#include <Eigen/Dense>

namespace setmem {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

}  // namespace setmem
