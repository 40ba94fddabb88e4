#pragma once

#include <Eigen/Dense>
#include <string>
#include <string_view>

namespace qv {

/// Ambient norm on the state space R^d.
enum class Norm { Euclidean, L1, LInf };

double vector_norm(const Eigen::VectorXd& x, Norm n);

std::string to_string(Norm n);
Norm norm_from_string(std::string_view s);

}  // namespace qv
