#include "qv/norms.hpp"

#include <stdexcept>

namespace qv {

double vector_norm(const Eigen::VectorXd& x, Norm n) {
    switch (n) {
        case Norm::Euclidean: return x.norm();
        case Norm::L1: return x.lpNorm<1>();
        case Norm::LInf: return x.lpNorm<Eigen::Infinity>();
    }
    throw std::logic_error("unknown norm");
}

std::string to_string(Norm n) {
    switch (n) {
        case Norm::Euclidean: return "euclidean";
        case Norm::L1: return "l1";
        case Norm::LInf: return "linf";
    }
    return "?";
}

Norm norm_from_string(std::string_view s) {
    if (s == "euclidean" || s == "l2") return Norm::Euclidean;
    if (s == "l1") return Norm::L1;
    if (s == "linf" || s == "max") return Norm::LInf;
    throw std::invalid_argument("unknown norm: " + std::string(s));
}

}  // namespace qv
