#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "qv/norms.hpp"

namespace qv {

/// A single jump: at `time` the path moves by `delta` (right-continuously).
struct Jump {
    double time;
    Eigen::VectorXd delta;
};

enum class Interp { PiecewiseLinear, PiecewiseConstantRight };

/// Time interval with endpoint inclusion flags. ]a,b], [a,b[ and [a,b] all occur.
struct TimeInterval {
    double a = 0.0;
    double b = 0.0;
    bool closed_left = true;
    bool closed_right = true;

    static TimeInterval closed(double a, double b) { return {a, b, true, true}; }
    static TimeInterval left_open(double a, double b) { return {a, b, false, true}; }
    static TimeInterval right_open(double a, double b) { return {a, b, true, false}; }
    bool empty() const { return b < a || (a == b && !(closed_left && closed_right)); }
};

/// Cadlag path in R^d on [0,T]: a continuous-between-breakpoints part sampled on
/// a grid, plus an explicit list of jumps. The jump bookkeeping is exact: values,
/// left limits and jump sizes are all structural, never inferred from samples.
///
/// value(t)      = continuous_part(t) + sum of deltas with jump time <= t
/// left_limit(t) = continuous_left(t) + sum of deltas with jump time <  t
class CadlagPath {
public:
    CadlagPath() = default;
    CadlagPath(std::vector<double> grid, std::vector<Eigen::VectorXd> samples,
               std::vector<Jump> jumps, Interp interp = Interp::PiecewiseLinear);

    /// Path constant zero on [0,T] in R^d with the given jumps.
    static CadlagPath pure_jump(double horizon, int dim, std::vector<Jump> jumps);
    /// Constant path.
    static CadlagPath constant(double horizon, const Eigen::VectorXd& v);

    int dim() const { return dim_; }
    double horizon() const { return grid_.back(); }
    const std::vector<double>& grid() const { return grid_; }
    const std::vector<Eigen::VectorXd>& samples() const { return samples_; }
    const std::vector<Jump>& jumps() const { return jumps_; }
    Interp interp() const { return interp_; }

    /// Right-continuous evaluation, t in [0,T].
    Eigen::VectorXd value(double t) const;
    /// Left limit, t in ]0,T].
    Eigen::VectorXd left_limit(double t) const;
    /// Jump size at t (zero vector if t is not a jump time).
    Eigen::VectorXd jump_at(double t) const;
    /// Continuous part only.
    Eigen::VectorXd continuous_value(double t) const;
    Eigen::VectorXd continuous_left(double t) const;
    /// Sum of jump deltas with time <= t (or < t for the strict variant).
    Eigen::VectorXd jump_sum(double t) const;
    Eigen::VectorXd jump_sum_before(double t) const;

    bool has_jump_at(double t) const;

private:
    int dim_ = 0;
    std::vector<double> grid_;
    std::vector<Eigen::VectorXd> samples_;
    std::vector<Jump> jumps_;
    std::vector<Eigen::VectorXd> jump_prefix_;  // jump_prefix_[i] = sum of deltas [0..i]
    Interp interp_ = Interp::PiecewiseLinear;
};

/// Finite-variation paths use the same representation; values may live in R^m.
using FVPath = CadlagPath;

/// Jump times of `path` with norm(delta) > eps (the set D_eps(X)).
struct JumpSet {
    double threshold;
    std::vector<double> times;
};
JumpSet jump_set(const CadlagPath& path, double eps, Norm norm = Norm::Euclidean);

/// Splits off the jumps larger than eps: J carries exactly those jumps (zero
/// continuous part), residual = path - J. path == J + residual pointwise.
struct JumpTruncation {
    FVPath big_jumps;       // J_eps(X)
    CadlagPath residual;    // X - J_eps(X); all remaining jumps have norm <= eps
};
JumpTruncation truncate_jumps(const CadlagPath& path, double eps, Norm norm = Norm::Euclidean);

/// Oscillation omega(X, A) = sup of pairwise distances of path values over the
/// interval. Exact for the piecewise representation: attained on breakpoints
/// and one-sided limits at excluded endpoints.
double oscillation(const CadlagPath& path, const TimeInterval& interval, Norm norm = Norm::Euclidean);

/// Total variation over [a,b], exact for the piecewise representation:
/// variation of the continuous part plus jump norms in ]a,b].
double total_variation(const CadlagPath& path, double a, double b, Norm norm = Norm::Euclidean);
double total_variation(const CadlagPath& path, double a, double b,
                       const std::function<double(const Eigen::VectorXd&)>& value_norm);

/// sup over the family of total_variation (Def of uniformly finite variation,
/// finite families only).
double family_variation(const std::vector<CadlagPath>& family, double a, double b,
                        Norm norm = Norm::Euclidean);

}  // namespace qv
