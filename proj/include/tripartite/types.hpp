#pragma once

#include <Eigen/Dense>

namespace tripartite {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

}  // namespace tripartite
