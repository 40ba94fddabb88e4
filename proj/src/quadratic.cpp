#include "qv/quadratic.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace qv {

namespace {

void check_times_sorted(const std::vector<double>& times, double T) {
    for (size_t i = 0; i < times.size(); ++i) {
        if (times[i] < 0.0 || times[i] > T) throw std::domain_error("reporting time outside [0,T]");
        if (i > 0 && times[i] < times[i - 1])
            throw std::invalid_argument("reporting times must be sorted");
    }
}

double spectral_norm(const Eigen::MatrixXd& M) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    return svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
}

CadlagPath map_path(const Eigen::MatrixXd& T, const CadlagPath& p) {
    std::vector<Eigen::VectorXd> samples;
    samples.reserve(p.samples().size());
    for (const auto& s : p.samples()) samples.push_back(T * s);
    std::vector<Jump> jumps;
    jumps.reserve(p.jumps().size());
    for (const auto& j : p.jumps()) jumps.push_back({j.time, T * j.delta});
    return CadlagPath(p.grid(), std::move(samples), std::move(jumps), p.interp());
}

std::vector<Eigen::MatrixXd> coefficient_matrices_of(const BilinearForm& B) {
    const int d = B.in_dim();
    switch (B.kind()) {
        case BilinearKind::Inner:
            return {Eigen::MatrixXd::Identity(d, d)};
        case BilinearKind::Outer: {
            std::vector<Eigen::MatrixXd> c;
            c.reserve(static_cast<size_t>(d) * d);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) {
                    Eigen::MatrixXd E = Eigen::MatrixXd::Zero(d, d);
                    E(i, j) = 1.0;
                    c.push_back(std::move(E));
                }
            return c;
        }
        case BilinearKind::Coefficients:
            return B.coefficient_matrices();
    }
    throw std::logic_error("unreachable");
}

}  // namespace

std::vector<Eigen::VectorXd> discrete_qv_profile(const BilinearForm& B, const CadlagPath& X,
                                                 const CadlagPath& Y, const Partition& pi,
                                                 const std::vector<double>& times) {
    if (X.dim() != B.in_dim() || Y.dim() != B.in_dim())
        throw std::invalid_argument("discrete_qv: path dimension does not match bilinear form");
    if (X.horizon() != Y.horizon()) throw std::invalid_argument("discrete_qv: horizon mismatch");
    check_times_sorted(times, pi.horizon());

    const size_t n_times = times.size();
    std::vector<Eigen::VectorXd> out(n_times);
    KahanVec acc(B.out_dim());
    size_t ti = 0;
    const auto& pts = pi.points;
    for (size_t i = 0; i + 1 < pts.size() && ti < n_times; ++i) {
        const double r = pts[i], s = pts[i + 1];
        while (ti < n_times && times[ti] <= r) out[ti++] = acc.value();
        if (ti >= n_times) break;
        Eigen::VectorXd Xr = X.value(r);
        Eigen::VectorXd Yr = Y.value(r);
        for (; ti < n_times && times[ti] < s; ++ti)
            out[ti] = acc.value() + B.apply(X.value(times[ti]) - Xr, Y.value(times[ti]) - Yr);
        acc.add(B.apply(X.value(s) - Xr, Y.value(s) - Yr));
        while (ti < n_times && times[ti] == s) out[ti++] = acc.value();
    }
    while (ti < n_times) out[ti++] = acc.value();
    return out;
}

Eigen::VectorXd discrete_qv(const BilinearForm& B, const CadlagPath& X, const CadlagPath& Y,
                            const Partition& pi, double t) {
    return discrete_qv_profile(B, X, Y, pi, {t}).front();
}

std::vector<double> discrete_scalar_qv_profile(const CadlagPath& X, const Partition& pi,
                                               const std::vector<double>& times, Norm norm) {
    check_times_sorted(times, pi.horizon());
    const size_t n_times = times.size();
    std::vector<double> out(n_times, 0.0);
    KahanVec acc(1);
    Eigen::VectorXd one(1);
    size_t ti = 0;
    const auto& pts = pi.points;
    for (size_t i = 0; i + 1 < pts.size() && ti < n_times; ++i) {
        const double r = pts[i], s = pts[i + 1];
        while (ti < n_times && times[ti] <= r) out[ti++] = acc.value()[0];
        if (ti >= n_times) break;
        Eigen::VectorXd Xr = X.value(r);
        for (; ti < n_times && times[ti] < s; ++ti) {
            double v = vector_norm(X.value(times[ti]) - Xr, norm);
            out[ti] = acc.value()[0] + v * v;
        }
        double v = vector_norm(X.value(s) - Xr, norm);
        one[0] = v * v;
        acc.add(one);
        while (ti < n_times && times[ti] == s) out[ti++] = acc.value()[0];
    }
    while (ti < n_times) out[ti++] = acc.value()[0];
    return out;
}

double discrete_scalar_qv(const CadlagPath& X, const Partition& pi, double t, Norm norm) {
    return discrete_scalar_qv_profile(X, pi, {t}, norm).front();
}

double two_variation(const CadlagPath& X, const PartitionSequence& seq, double t, Norm norm) {
    double sup = 0.0;
    for (const auto& pi : seq.levels) sup = std::max(sup, discrete_scalar_qv(X, pi, t, norm));
    return sup;
}

namespace {

std::vector<Eigen::VectorXd> extrapolate(const std::vector<std::vector<Eigen::VectorXd>>& v,
                                         int order) {
    const size_t L = v.size();
    const size_t n_times = v.back().size();
    std::vector<Eigen::VectorXd> lim(n_times);
    for (size_t k = 0; k < n_times; ++k) {
        if (order >= 2 && L >= 3)
            lim[k] = (8.0 * v[L - 1][k] - 6.0 * v[L - 2][k] + v[L - 3][k]) / 3.0;
        else if (order >= 1 && L >= 2)
            lim[k] = 2.0 * v[L - 1][k] - v[L - 2][k];
        else
            lim[k] = v[L - 1][k];
    }
    return lim;
}

}  // namespace

QVLimitResult qv_limit(const BilinearForm& B, const CadlagPath& X, const CadlagPath& Y,
                       const PartitionSequence& seq, const std::vector<double>& reporting_times,
                       const QVLimitOptions& opts) {
    if (seq.size() < 4) throw std::invalid_argument("qv_limit: need at least 4 levels");
    ConvergenceEstimate est;
    est.times = reporting_times;
    est.level_labels = seq.labels;
    est.tolerance = opts.tolerance;
    est.values.reserve(seq.size());
    for (const auto& pi : seq.levels)
        est.values.push_back(discrete_qv_profile(B, X, Y, pi, reporting_times));

    const size_t L = est.values.size();
    double tail = 0.0;
    for (size_t k = 0; k < reporting_times.size(); ++k) {
        double scale = 1.0 + est.values[L - 1][k].norm();
        tail = std::max(tail, (est.values[L - 1][k] - est.values[L - 2][k]).norm() / scale);
        tail = std::max(tail, (est.values[L - 2][k] - est.values[L - 3][k]).norm() / scale);
    }
    est.cauchy_tail = tail;
    est.verdict = (tail <= opts.tolerance) ? Verdict::Pass : Verdict::Inconclusive;
    est.limit = extrapolate(est.values, opts.richardson_order);

    // Assemble the limit path. Jumps come from path metadata, never from the
    // numerical limit (Def 2.1(ii) is structural).
    std::vector<double> grid = reporting_times;
    std::vector<Eigen::VectorXd> limit_at = est.limit;
    if (grid.empty() || grid.front() > 0.0) {
        grid.insert(grid.begin(), 0.0);
        limit_at.insert(limit_at.begin(), Eigen::VectorXd::Zero(B.out_dim()));
    }
    const double T_path = grid.back();
    std::set<double> jt;
    for (const auto& j : X.jumps()) jt.insert(j.time);
    for (const auto& j : Y.jumps()) jt.insert(j.time);
    std::vector<Jump> jumps;
    for (double s : jt)
        if (s <= T_path) jumps.push_back({s, B.apply(X.jump_at(s), Y.jump_at(s))});

    CadlagPath jump_carrier = CadlagPath::pure_jump(std::max(T_path, 1.0), B.out_dim(), jumps);
    std::vector<Eigen::VectorXd> cont(grid.size());
    for (size_t i = 0; i < grid.size(); ++i) cont[i] = limit_at[i] - jump_carrier.jump_sum(grid[i]);

    QVPath qv;
    qv.path = CadlagPath(std::move(grid), std::move(cont), std::move(jumps));
    qv.out_dim = B.out_dim();
    qv.mat_dim = (B.kind() == BilinearKind::Outer) ? B.in_dim() : 0;
    return {std::move(qv), std::move(est)};
}

std::pair<FVPath, FVPath> split_continuous_jump(const QVPath& qv) {
    FVPath cont(qv.path.grid(), qv.path.samples(), {}, qv.path.interp());
    FVPath jumps = CadlagPath::pure_jump(qv.path.horizon(), qv.out_dim,
                                         std::vector<Jump>(qv.path.jumps()));
    return {std::move(cont), std::move(jumps)};
}

QVPath push_linear(const Eigen::MatrixXd& T, const QVPath& qv) {
    if (T.cols() != qv.out_dim) throw std::invalid_argument("push_linear: dimension mismatch");
    QVPath out;
    out.path = map_path(T, qv.path);
    out.out_dim = static_cast<int>(T.rows());
    int sq = static_cast<int>(std::lround(std::sqrt(double(out.out_dim))));
    out.mat_dim = (qv.mat_dim > 0 && sq * sq == out.out_dim && out.out_dim > 1) ? sq : 0;

    const double v_in = total_variation(qv.path, 0.0, qv.path.horizon(), Norm::Euclidean);
    const double v_out = total_variation(out.path, 0.0, out.path.horizon(), Norm::Euclidean);
    const double bound = spectral_norm(T) * v_in;
    if (v_out > bound + 1e-9 * (1.0 + bound))
        throw std::logic_error("push_linear: variation bound violated");
    return out;
}

PushPairResult push_pair(const Eigen::MatrixXd& T1, const Eigen::MatrixXd& T2,
                         const CadlagPath& X, const CadlagPath& Y, const BilinearForm& Bprime,
                         const PartitionSequence& seq, const std::vector<double>& reporting_times,
                         const QVLimitOptions& opts) {
    if (T1.cols() != X.dim() || T2.cols() != Y.dim() || T1.rows() != Bprime.in_dim() ||
        T2.rows() != Bprime.in_dim())
        throw std::invalid_argument("push_pair: dimension mismatch");

    // B = B' o (T1 x T2): coefficient matrices T1^T C'_k T2.
    std::vector<Eigen::MatrixXd> c;
    for (const auto& Ck : coefficient_matrices_of(Bprime))
        c.push_back(T1.transpose() * Ck * T2);
    BilinearForm B = BilinearForm::coefficients(std::move(c));

    CadlagPath TX = map_path(T1, X), TY = map_path(T2, Y);
    double max_disc = 0.0;
    for (const auto& pi : seq.levels) {
        auto lhs = discrete_qv_profile(Bprime, TX, TY, pi, reporting_times);
        auto rhs = discrete_qv_profile(B, X, Y, pi, reporting_times);
        for (size_t k = 0; k < lhs.size(); ++k)
            max_disc = std::max(max_disc, (lhs[k] - rhs[k]).norm() / (1.0 + rhs[k].norm()));
    }
    return {qv_limit(Bprime, TX, TY, seq, reporting_times, opts), max_disc};
}

QVPath cylindrical_qv(const Eigen::VectorXd& x_star, const Eigen::VectorXd& y_star,
                      const QVPath& tensor_qv) {
    const int d = tensor_qv.mat_dim;
    if (d == 0 || x_star.size() != d || y_star.size() != d)
        throw std::invalid_argument("cylindrical_qv: need a matrix-valued QV path");
    Eigen::MatrixXd T(1, d * d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) T(0, i * d + j) = x_star[i] * y_star[j];
    return push_linear(T, tensor_qv);
}

QVPath trace_qv(const QVPath& tensor_qv) {
    const int d = tensor_qv.mat_dim;
    if (d == 0) throw std::invalid_argument("trace_qv: need a matrix-valued QV path");
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(1, d * d);
    for (int i = 0; i < d; ++i) T(0, i * d + i) = 1.0;
    return push_linear(T, tensor_qv);
}

Eigen::VectorXd restarted_qv(const BilinearForm& B, const CadlagPath& X, const Partition& pi,
                             double s, double t) {
    if (s > t) throw std::domain_error("restarted_qv: s > t");
    if (s < 0.0 || t > pi.horizon()) throw std::domain_error("restarted_qv: window outside [0,T]");
    KahanVec acc(B.out_dim());
    const auto& pts = pi.points;
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
        const double lo = std::max(std::min(pts[i], t), s);
        const double hi = std::max(std::min(pts[i + 1], t), s);
        if (hi <= lo) continue;
        Eigen::VectorXd d = X.value(hi) - X.value(lo);
        acc.add(B.apply(d, d));
    }
    return acc.value();
}

AbsContinuityReport abs_continuity_check(const QVPath& qv_B, const QVPath& qv_scalar,
                                         double norm_B, Crossnorm alpha,
                                         const std::vector<std::pair<double, double>>& time_pairs,
                                         double slack) {
    if (qv_scalar.out_dim != 1)
        throw std::invalid_argument("abs_continuity_check: scalar QV path must be 1-dimensional");
    AbsContinuityReport rep;
    rep.slack = slack;
    for (auto [s, t] : time_pairs) {
        if (s > t) std::swap(s, t);
        AbsContinuityRow row;
        row.s = s;
        row.t = t;
        row.lhs = value_norm(qv_B.path.value(t) - qv_B.path.value(s), qv_B.mat_dim, alpha);
        row.rhs = norm_B * (qv_scalar.path.value(t)[0] - qv_scalar.path.value(s)[0]);
        row.violation = std::max(0.0, row.lhs - row.rhs - slack);
        rep.max_violation = std::max(rep.max_violation, row.violation);
        rep.rows.push_back(row);
    }
    return rep;
}

DensityEstimate density_estimate(const QVPath& qv_B, const QVPath& qv_scalar,
                                 const Partition& dissection, double floor, Crossnorm alpha,
                                 double norm_B) {
    if (floor <= 0.0) throw std::domain_error("density_estimate: floor must be positive");
    DensityEstimate out;
    out.floor = floor;
    double recon = 0.0;
    bool any_mass = false;
    for (size_t i = 0; i + 1 < dissection.points.size(); ++i) {
        DensityCell cell;
        cell.a = dissection.points[i];
        cell.b = dissection.points[i + 1];
        cell.dQ = qv_scalar.path.value(cell.b)[0] - qv_scalar.path.value(cell.a)[0];
        Eigen::VectorXd dQB = qv_B.path.value(cell.b) - qv_B.path.value(cell.a);
        if (cell.dQ > floor) {
            any_mass = true;
            cell.has_mass = true;
            cell.q = dQB / cell.dQ;
            cell.q_norm = value_norm(cell.q, qv_B.mat_dim, alpha);
            out.max_norm_excess = std::max(out.max_norm_excess, cell.q_norm - norm_B);
            recon += cell.q_norm * cell.dQ;
        } else {
            cell.has_mass = false;
            recon += value_norm(dQB, qv_B.mat_dim, alpha);
        }
        out.cells.push_back(std::move(cell));
    }
    if (!any_mass)
        throw std::runtime_error("density_estimate: scalar QV carries no mass at this resolution");
    out.max_norm_excess = std::max(0.0, out.max_norm_excess);
    const double T = dissection.horizon();
    const int mat_dim = qv_B.mat_dim;
    double v = total_variation(qv_B.path, 0.0, T, [mat_dim, alpha](const Eigen::VectorXd& x) {
        return value_norm(x, mat_dim, alpha);
    });
    out.reconstruction_error = std::abs(recon - v);
    return out;
}

UnitDensityReport unit_density_check(const DensityEstimate& density, const QVPath& qv_tensor,
                                     const QVPath& qv_scalar, const std::vector<double>& times) {
    UnitDensityReport rep;
    size_t n = 0;
    for (const auto& c : density.cells) {
        if (!c.has_mass) continue;
        double dev = std::abs(c.q_norm - 1.0);
        rep.mean_deviation += dev;
        rep.max_deviation = std::max(rep.max_deviation, dev);
        ++n;
    }
    if (n > 0) rep.mean_deviation /= static_cast<double>(n);
    const int mat_dim = qv_tensor.mat_dim;
    for (double t : times) {
        double v = total_variation(qv_tensor.path, 0.0, t,
                                   [mat_dim](const Eigen::VectorXd& x) {
                                       return value_norm(x, mat_dim, Crossnorm::Projective);
                                   });
        double q = qv_scalar.path.value(t)[0];
        rep.variation_gap = std::max(rep.variation_gap, std::abs(v - q) / (1.0 + q));
    }
    return rep;
}

}  // namespace qv
