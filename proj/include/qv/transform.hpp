#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qv/quadratic.hpp"

namespace qv {

enum class Smoothness { C1, C12 };

/// f(a, x): R^p x R^d -> R^q with first derivatives in both slots and a
/// Hessian in x (C12 only). Derivatives are validated against central finite
/// differences at construction.
class SmoothFunction {
public:
    using Eval = std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>;
    using Deriv = std::function<Eigen::MatrixXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>;
    using Hess =
        std::function<std::vector<Eigen::MatrixXd>(const Eigen::VectorXd&, const Eigen::VectorXd&)>;

    /// Validates da/dx/dxx against finite differences of f at `probes`
    /// (pairs (a, x); a default probe set is generated when empty).
    static SmoothFunction make(int a_dim, int x_dim, int out_dim, Smoothness smooth, Eval f,
                               Deriv da, Deriv dx, Hess dxx, std::string description = {},
                               std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> probes = {});

    // Presets.
    static SmoothFunction norm_sq(int d);                       // f(x) = |x|^2
    static SmoothFunction sin1d();                              // f(x) = sin(x), d = 1
    static SmoothFunction linear(const Eigen::MatrixXd& M);     // f(x) = M x
    static SmoothFunction bilinear_ax();                        // f(a, x) = a * x, p = d = 1
    static SmoothFunction square1d();                           // f(x) = x^2
    static SmoothFunction custom_poly(const std::vector<double>& coeff);  // sum c_k x^k, d = 1

    int a_dim() const { return a_dim_; }
    int x_dim() const { return x_dim_; }
    int out_dim() const { return out_dim_; }
    Smoothness smoothness() const { return smooth_; }
    const std::string& description() const { return desc_; }

    Eigen::VectorXd f(const Eigen::VectorXd& a, const Eigen::VectorXd& x) const { return f_(a, x); }
    Eigen::MatrixXd da(const Eigen::VectorXd& a, const Eigen::VectorXd& x) const;   // q x p
    Eigen::MatrixXd dx(const Eigen::VectorXd& a, const Eigen::VectorXd& x) const;   // q x d
    std::vector<Eigen::MatrixXd> dxx(const Eigen::VectorXd& a,
                                     const Eigen::VectorXd& x) const;  // q Hessians, d x d

    /// sum_k H_k(v, w) stacked into R^q.
    Eigen::VectorXd apply_dxx(const Eigen::VectorXd& a, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& v, const Eigen::VectorXd& w) const;

private:
    SmoothFunction() = default;
    int a_dim_ = 0, x_dim_ = 0, out_dim_ = 0;
    Smoothness smooth_ = Smoothness::C1;
    std::string desc_;
    Eval f_;
    Deriv da_, dx_;
    Hess dxx_;
};

/// Time-dependent C1 map (t, x) -> f(t, x) with exact one-sided limits in t.
/// time_jumps lists the t where f(., x) jumps; K_hat is the parameter sample
/// on which the uniform-finite-variation hypothesis is checked.
struct PathFunctional {
    int x_dim = 0, out_dim = 0;
    std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)> f;
    std::function<Eigen::MatrixXd(double, const Eigen::VectorXd&)> dx;       // q x d
    std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)> f_left;   // f(t-, x)
    std::function<Eigen::MatrixXd(double, const Eigen::VectorXd&)> dx_left;  // D_x f(t-, x)
    std::vector<double> time_jumps;
    std::vector<Eigen::VectorXd> K_hat;

    static PathFunctional time_independent(const SmoothFunction& f);
    /// fp(t, x) = F(A_t, x); inherits A's jump times.
    static PathFunctional from_smooth(const SmoothFunction& F, const FVPath& A);

    /// max over x in K_hat of the discretized variation of t -> f(t,x) on a
    /// uniform n-point grid over [0, T]; finite-ness witness per the
    /// uniform-variation hypothesis.
    double variation_witness(double T, int n = 1024) const;
};

Eigen::VectorXd follmer_integral(const std::function<Eigen::MatrixXd(double)>& xi,
                                 const CadlagPath& X, const Partition& pi, double t);
/// xi stored as a path of q x d matrices flattened row-major.
Eigen::VectorXd follmer_integral(const CadlagPath& xi_flat, int q, const CadlagPath& X,
                                 const Partition& pi, double t);

/// Left-endpoint Stieltjes integral of xi(s-) against a QV path over ]0, t]:
/// sums on the qv reporting grid for the continuous part; exact jump terms
/// xi(s-) * dQ_s unless continuous_only. xi maps times to q x m matrices.
Eigen::VectorXd stieltjes_against_qv(const std::function<Eigen::MatrixXd(double)>& xi_left,
                                     const QVPath& qv, double t, bool continuous_only = false);

/// Discrete sums sum_I xi(r) B(dX, dX)(I) per level vs the Stieltjes integral
/// against the limit QV path. estimate.limit holds the integral.
ConvergenceEstimate stieltjes_sum_limit(const CadlagPath& xi_flat, int q, const BilinearForm& B,
                                        const CadlagPath& X, const QVPath& qv,
                                        const PartitionSequence& seq, double t,
                                        double tolerance = 1e-3);

struct ItoRow {
    int level = 0;
    double t = 0.0;
    Eigen::VectorXd lhs;        // f(A_t, X_t) - f(A_0, X_0)
    Eigen::VectorXd term_a;     // int D_a f dA^c
    Eigen::VectorXd term_x;     // Follmer integral of D_x f
    Eigen::VectorXd term_qv;    // 1/2 int D2_x f dQ^c (discrete-minus-jump form)
    Eigen::VectorXd term_jump;  // sum of jump corrections
    Eigen::VectorXd residual;   // lhs - (term_a + term_x + term_qv + term_jump)
};

struct ItoReport {
    std::vector<ItoRow> rows;
    std::vector<ConditionReport> preflight;  // advisory stamps, optional
};

/// One change-of-variable row at a single level. The second-order term is the
/// discrete sum 1/2 sum_I D2f(A_r,X_r)(dX,dX) minus its exact jump part, which
/// converges to 1/2 int D2f dQ^c and makes the |x|^2 residual vanish exactly
/// at every level.
ItoRow ito_rhs(const SmoothFunction& f, const FVPath& A, const CadlagPath& X, const Partition& pi,
               int level_label, double t);

ItoReport ito_profile(const SmoothFunction& f, const FVPath& A, const CadlagPath& X,
                      const PartitionSequence& seq, const std::vector<double>& reporting_times);

/// QV of the composite path Z_t = f(t, X_t), computed directly: the composite
/// is sampled on the union grid and carries exact composite jumps.
QVLimitResult c1_qv_direct(const PathFunctional& fp, const CadlagPath& X,
                           const PartitionSequence& seq,
                           const std::vector<double>& reporting_times,
                           const QVLimitOptions& opts = {});

/// Transformation formula: int Dxf(s-)^{tensor 2} dQ^c + sum df(s,X_s)^{tensor 2}.
/// Requires a tensor (Outer) qv path.
QVPath c1_qv_formula(const PathFunctional& fp, const CadlagPath& X, const QVPath& qv,
                     const std::vector<double>& reporting_times);

/// Taylor remainder of one interval: the theta-integral of
/// {Dxf(r^t, X + theta dX) - Dxf(r^t, X)} dX by 16-point Gauss-Legendre.
Eigen::VectorXd taylor_remainder(const PathFunctional& fp, const CadlagPath& X, const Partition& pi,
                                 size_t interval_index, double t);

/// C1 transformation for f(A_t, x) with A of finite variation.
QVPath c1_smooth_transform(const SmoothFunction& f, const FVPath& A, const CadlagPath& X,
                           const QVPath& qv, const std::vector<double>& reporting_times);

struct IntegralQVResult {
    QVLimitResult lhs;   // QV of the Follmer-integral path, level-consistent
    QVPath rhs;          // int Dxf(s-)^{tensor 2} d[X,X] (full, jumps included)
    double max_gap = 0;  // relative gap at the finest level over reporting times
};

/// QV of Y = int Dxf(A_{s-}, X_{s-}) dX against its closed form.
IntegralQVResult integral_qv(const SmoothFunction& f, const FVPath& A, const CadlagPath& X,
                             const QVPath& qv, const PartitionSequence& seq,
                             const std::vector<double>& reporting_times,
                             const QVLimitOptions& opts = {});

struct RoughFVDecomposition {
    CadlagPath Y;  // Follmer-integral part (finest level)
    FVPath C;      // continuous finite-variation part
    FVPath D;      // pure-jump finite-variation part
    double max_reconstruction_error = 0.0;  // vs f(A_t,X_t) - f(A_0,X_0)
};

RoughFVDecomposition rough_fv_decompose(const SmoothFunction& f, const FVPath& A,
                                        const CadlagPath& X, const QVPath& qv,
                                        const PartitionSequence& seq,
                                        const std::vector<double>& reporting_times);

}  // namespace qv
