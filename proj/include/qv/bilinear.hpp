#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "qv/norms.hpp"

namespace qv {

enum class BilinearKind { Inner, Outer, Coefficients };

/// Bounded bilinear map B: R^d x R^d -> R^m.
///   Inner        m = 1,   B(x,y) = <x,y>
///   Outer        m = d*d, B(x,y) = x y^T flattened row-major
///   Coefficients B(x,y)_k = x^T C_k y for given matrices C_k
class BilinearForm {
public:
    static BilinearForm inner(int d);
    static BilinearForm outer(int d);
    static BilinearForm coefficients(std::vector<Eigen::MatrixXd> c, uint64_t norm_seed = 7);

    BilinearKind kind() const { return kind_; }
    int in_dim() const { return in_dim_; }
    int out_dim() const { return out_dim_; }

    Eigen::VectorXd apply(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;

    /// ||B||: exact 1 for Inner and Outer (Euclidean ground norm, any reasonable
    /// crossnorm); power-iteration estimate for Coefficients.
    double operator_norm() const { return op_norm_; }
    bool norm_is_estimate() const { return norm_estimated_; }

    /// The composed form (T o B)(x,y) = T * B(x,y), T a k x m matrix.
    BilinearForm compose_linear(const Eigen::MatrixXd& T) const;

    const std::vector<Eigen::MatrixXd>& coefficient_matrices() const { return coeff_; }

private:
    BilinearForm() = default;
    BilinearKind kind_ = BilinearKind::Inner;
    int in_dim_ = 0;
    int out_dim_ = 0;
    std::vector<Eigen::MatrixXd> coeff_;  // Coefficients kind only
    double op_norm_ = 0.0;
    bool norm_estimated_ = false;
};

/// Crossnorms on R^d (x) R^d realized as matrix norms (Euclidean ground norm):
/// Projective = nuclear, Injective = spectral, Hilbertian = Frobenius.
enum class Crossnorm { Projective, Injective, Hilbertian };

double matrix_crossnorm(const Eigen::MatrixXd& M, Crossnorm alpha);

/// Norm of a flattened bilinear-form value: crossnorm for square-matrix values,
/// Euclidean otherwise. `mat_dim` > 0 marks a d x d matrix flattened row-major.
double value_norm(const Eigen::VectorXd& v, int mat_dim, Crossnorm alpha);

Eigen::MatrixXd unflatten(const Eigen::VectorXd& v, int rows, int cols);
Eigen::VectorXd flatten(const Eigen::MatrixXd& M);

std::string to_string(Crossnorm a);
Crossnorm crossnorm_from_string(std::string_view s);

}  // namespace qv
