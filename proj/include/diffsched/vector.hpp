#pragma once

#include <Eigen/Core>

namespace diffsched {

using Vector = Eigen::VectorXd;

}  // namespace diffsched
