#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "qv/bilinear.hpp"
#include "qv/conditions.hpp"
#include "qv/partition.hpp"
#include "qv/path.hpp"

namespace qv {

/// Compensated (Kahan) accumulator for Eigen vectors; the discrete sums feed
/// 1e-12-level identities, so plain summation error growth is not acceptable.
class KahanVec {
public:
    explicit KahanVec(int dim)
        : sum_(Eigen::VectorXd::Zero(dim)), comp_(Eigen::VectorXd::Zero(dim)) {}
    void add(const Eigen::VectorXd& x) {
        Eigen::VectorXd y = x - comp_;
        Eigen::VectorXd t = sum_ + y;
        comp_ = (t - sum_) - y;
        sum_ = t;
    }
    const Eigen::VectorXd& value() const { return sum_; }

private:
    Eigen::VectorXd sum_, comp_;
};

/// Per-level values of a discrete functional at reporting times, with a
/// Cauchy-tail convergence verdict and an (optionally Richardson-extrapolated)
/// limit. richardson_order 0 takes the finest level as the limit; order k
/// eliminates the first k powers of the mesh assuming mesh halving per level.
struct ConvergenceEstimate {
    std::vector<double> times;
    std::vector<int> level_labels;
    std::vector<std::vector<Eigen::VectorXd>> values;  // [level][time]
    std::vector<Eigen::VectorXd> limit;                // per time
    Verdict verdict = Verdict::Inconclusive;
    double cauchy_tail = 0.0;  // max over times of the last two level-to-level gaps
    double tolerance = 0.0;
};

struct QVPath {
    FVPath path;      // values in R^m: continuous part + exact jump list
    int out_dim = 1;
    int mat_dim = 0;  // d when values are d x d matrices flattened row-major

    Eigen::MatrixXd value_matrix(double t) const {
        return unflatten(path.value(t), mat_dim, mat_dim);
    }
};

/// Q_B^pi(X,Y)_t = sum over I in pi of B(delta X_t, delta Y_t)(I).
Eigen::VectorXd discrete_qv(const BilinearForm& B, const CadlagPath& X, const CadlagPath& Y,
                            const Partition& pi, double t);
/// Same, evaluated at several (sorted) times in one pass over the partition.
std::vector<Eigen::VectorXd> discrete_qv_profile(const BilinearForm& B, const CadlagPath& X,
                                                 const CadlagPath& Y, const Partition& pi,
                                                 const std::vector<double>& times);

/// Q^pi(X)_t = sum of ||delta X_t(I)||^2 in the chosen ambient norm.
double discrete_scalar_qv(const CadlagPath& X, const Partition& pi, double t,
                          Norm norm = Norm::Euclidean);
std::vector<double> discrete_scalar_qv_profile(const CadlagPath& X, const Partition& pi,
                                               const std::vector<double>& times,
                                               Norm norm = Norm::Euclidean);

/// V^(2)(X;(pi_n))_t restricted to the computed levels (sup over levels).
double two_variation(const CadlagPath& X, const PartitionSequence& seq, double t,
                     Norm norm = Norm::Euclidean);

struct QVLimitOptions {
    double tolerance = 1e-6;     // relative Cauchy-tail tolerance
    int richardson_order = 0;    // 0, 1 or 2
};

struct QVLimitResult {
    QVPath qv;
    ConvergenceEstimate estimate;
};

/// Level-by-level discrete QV with convergence detection. The limit QVPath
/// carries the exact jump list {(s, B(dX_s, dY_s))} from path metadata; its
/// continuous part interpolates limit-minus-jumps between reporting times.
QVLimitResult qv_limit(const BilinearForm& B, const CadlagPath& X, const CadlagPath& Y,
                       const PartitionSequence& seq, const std::vector<double>& reporting_times,
                       const QVLimitOptions& opts = {});

/// (continuous part, pure-jump part); they sum back to qv at all times.
std::pair<FVPath, FVPath> split_continuous_jump(const QVPath& qv);

/// Pushforward identity Q_{T o B} = T o Q_B: applies T to values and jumps. Checks the
/// variation bound V(T o Q) <= ||T|| V(Q) on the output.
QVPath push_linear(const Eigen::MatrixXd& T, const QVPath& qv);

struct PushPairResult {
    QVLimitResult transformed;        // QV of (T1 X, T2 Y) under B'
    double max_level_discrepancy;     // vs discrete QV of (X,Y) under B' o (T1 x T2)
};
PushPairResult push_pair(const Eigen::MatrixXd& T1, const Eigen::MatrixXd& T2,
                         const CadlagPath& X, const CadlagPath& Y, const BilinearForm& Bprime,
                         const PartitionSequence& seq, const std::vector<double>& reporting_times,
                         const QVLimitOptions& opts = {});

/// x* M y* entry path of a tensor QV (cylindrical covariation).
QVPath cylindrical_qv(const Eigen::VectorXd& x_star, const Eigen::VectorXd& y_star,
                      const QVPath& tensor_qv);

/// tr of a tensor QV; equals the scalar QV under the Euclidean norm.
QVPath trace_qv(const QVPath& tensor_qv);

/// Restarted discrete sum: sum of B on increments clamped to [s,t]
/// (X_{(u^t)vs} - X_{(r^t)vs}); converges to Q_B(t) - Q_B(s).
Eigen::VectorXd restarted_qv(const BilinearForm& B, const CadlagPath& X, const Partition& pi,
                             double s, double t);

struct AbsContinuityRow {
    double s, t;
    double lhs;        // ||Q_B(t) - Q_B(s)||_alpha
    double rhs;        // ||B|| (Q(t) - Q(s))
    double violation;  // max(0, lhs - rhs - slack)
};
struct AbsContinuityReport {
    std::vector<AbsContinuityRow> rows;
    double max_violation = 0.0;
    double slack = 0.0;
};
/// Domination inequality check on given (s,t) pairs.
AbsContinuityReport abs_continuity_check(const QVPath& qv_B, const QVPath& qv_scalar,
                                         double norm_B, Crossnorm alpha,
                                         const std::vector<std::pair<double, double>>& time_pairs,
                                         double slack = 1e-9);

struct DensityCell {
    double a, b;
    bool has_mass;
    Eigen::VectorXd q;   // empty when no mass
    double q_norm = 0.0;
    double dQ = 0.0;
};
struct DensityEstimate {
    std::vector<DensityCell> cells;
    double floor = 0.0;
    double max_norm_excess = 0.0;      // max over cells of (||q|| - ||B||)+
    double reconstruction_error = 0.0; // |sum ||q|| dQ - V(Q_B)| over [0,T]
};
/// Difference-quotient density q_B = dQ_B/dQ on the dissection cells
/// (Radon-Nikodym representation at finite resolution). Throws when no cell
/// carries scalar-QV mass above the floor.
DensityEstimate density_estimate(const QVPath& qv_B, const QVPath& qv_scalar,
                                 const Partition& dissection, double floor, Crossnorm alpha,
                                 double norm_B);

struct UnitDensityReport {
    double mean_deviation = 0.0;  // mean |  ||q||_nuc - 1 | over mass cells
    double max_deviation = 0.0;
    double variation_gap = 0.0;   // max over times of |V([X,X])_t - Q(X)_t| / (1+Q)
};
/// Unit-density check: unit nuclear norm of the density and V([X,X]) = Q(X).
UnitDensityReport unit_density_check(const DensityEstimate& density, const QVPath& qv_tensor,
                                     const QVPath& qv_scalar, const std::vector<double>& times);

}  // namespace qv
