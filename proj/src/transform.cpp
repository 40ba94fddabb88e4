#include "qv/transform.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace qv {

namespace {

// 16-point Gauss-Legendre rule on [0,1].
constexpr int kGL = 16;
constexpr double kGLNode[kGL / 2] = {0.0950125098376374, 0.2816035507792589,
                                     0.4580167776572274, 0.6178762444026438,
                                     0.7554044083550030, 0.8656312023878318,
                                     0.9445750230732326, 0.9894009349916499};
constexpr double kGLWeight[kGL / 2] = {0.1894506104550685, 0.1826034150449236,
                                       0.1691565193950025, 0.1495959888165767,
                                       0.1246289712555339, 0.0951585116824928,
                                       0.0622535239386479, 0.0271524594117541};

void gl01(std::vector<std::pair<double, double>>& nodes) {
    for (int i = 0; i < kGL / 2; ++i) {
        nodes.push_back({0.5 * (1.0 - kGLNode[i]), 0.5 * kGLWeight[i]});
        nodes.push_back({0.5 * (1.0 + kGLNode[i]), 0.5 * kGLWeight[i]});
    }
}

std::vector<double> sorted_unique(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

// Limit values at reporting times + structural jumps -> QVPath.
QVPath assemble_qv_path(const std::vector<double>& reporting_times,
                        const std::vector<Eigen::VectorXd>& values, std::vector<Jump> jumps,
                        int out_dim, int mat_dim) {
    std::vector<double> grid = reporting_times;
    std::vector<Eigen::VectorXd> at = values;
    if (grid.empty() || grid.front() > 0.0) {
        grid.insert(grid.begin(), 0.0);
        at.insert(at.begin(), Eigen::VectorXd::Zero(out_dim));
    }
    const double T = grid.back();
    std::vector<Jump> kept;
    for (auto& j : jumps)
        if (j.time <= T) kept.push_back(std::move(j));
    CadlagPath carrier = CadlagPath::pure_jump(std::max(T, 1.0), out_dim, kept);
    std::vector<Eigen::VectorXd> cont(grid.size());
    for (size_t i = 0; i < grid.size(); ++i) cont[i] = at[i] - carrier.jump_sum(grid[i]);
    QVPath qv;
    qv.path = CadlagPath(std::move(grid), std::move(cont), std::move(kept));
    qv.out_dim = out_dim;
    qv.mat_dim = mat_dim;
    return qv;
}

// Deterministic probe points for derivative validation.
std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> default_probes(int p, int d) {
    std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> pr;
    for (int j = 0; j < 5; ++j) {
        Eigen::VectorXd a(p), x(d);
        for (int i = 0; i < p; ++i) a[i] = 0.7 * std::sin(1.0 + j + 0.37 * i);
        for (int i = 0; i < d; ++i) x[i] = 0.9 * std::cos(2.0 + j + 0.53 * i);
        pr.push_back({std::move(a), std::move(x)});
    }
    return pr;
}

}  // namespace

SmoothFunction SmoothFunction::make(
    int a_dim, int x_dim, int out_dim, Smoothness smooth, Eval f, Deriv da, Deriv dx, Hess dxx,
    std::string description, std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> probes) {
    if (x_dim <= 0 || out_dim <= 0 || a_dim < 0)
        throw std::invalid_argument("SmoothFunction: bad dimensions");
    if (!f || !dx) throw std::invalid_argument("SmoothFunction: f and dx are required");
    if (smooth == Smoothness::C12 && !dxx)
        throw std::invalid_argument("SmoothFunction: C12 requires a second derivative");
    if (a_dim > 0 && !da) throw std::invalid_argument("SmoothFunction: a-dependence requires da");

    if (probes.empty()) probes = default_probes(a_dim, x_dim);
    const double h1 = 1e-4, h2 = 1e-3;
    for (const auto& [a, x] : probes) {
        if (a.size() != a_dim || x.size() != x_dim)
            throw std::invalid_argument("SmoothFunction: probe dimension mismatch");
        Eigen::MatrixXd J = dx(a, x);
        if (J.rows() != out_dim || J.cols() != x_dim)
            throw std::invalid_argument("SmoothFunction: dx has wrong shape");
        for (int i = 0; i < x_dim; ++i) {
            Eigen::VectorXd xp = x, xm = x;
            xp[i] += h1;
            xm[i] -= h1;
            Eigen::VectorXd fd = (f(a, xp) - f(a, xm)) / (2.0 * h1);
            if ((J.col(i) - fd).norm() > 1e-5 * (1.0 + fd.norm()))
                throw std::invalid_argument("SmoothFunction: dx disagrees with finite differences");
        }
        if (a_dim > 0) {
            Eigen::MatrixXd Ja = da(a, x);
            if (Ja.rows() != out_dim || Ja.cols() != a_dim)
                throw std::invalid_argument("SmoothFunction: da has wrong shape");
            for (int i = 0; i < a_dim; ++i) {
                Eigen::VectorXd ap = a, am = a;
                ap[i] += h1;
                am[i] -= h1;
                Eigen::VectorXd fd = (f(ap, x) - f(am, x)) / (2.0 * h1);
                if ((Ja.col(i) - fd).norm() > 1e-5 * (1.0 + fd.norm()))
                    throw std::invalid_argument(
                        "SmoothFunction: da disagrees with finite differences");
            }
        }
        if (dxx) {
            auto H = dxx(a, x);
            if (static_cast<int>(H.size()) != out_dim)
                throw std::invalid_argument("SmoothFunction: dxx needs one Hessian per output");
            for (int k = 0; k < out_dim; ++k) {
                if (H[k].rows() != x_dim || H[k].cols() != x_dim)
                    throw std::invalid_argument("SmoothFunction: Hessian has wrong shape");
                if ((H[k] - H[k].transpose()).norm() > 1e-12 * (1.0 + H[k].norm()))
                    throw std::invalid_argument("SmoothFunction: Hessian not symmetric");
                for (int i = 0; i < x_dim; ++i)
                    for (int j = 0; j < x_dim; ++j) {
                        Eigen::VectorXd xpp = x, xpm = x, xmp = x, xmm = x;
                        xpp[i] += h2; xpp[j] += h2;
                        xpm[i] += h2; xpm[j] -= h2;
                        xmp[i] -= h2; xmp[j] += h2;
                        xmm[i] -= h2; xmm[j] -= h2;
                        double fd = (f(a, xpp)[k] - f(a, xpm)[k] - f(a, xmp)[k] + f(a, xmm)[k]) /
                                    (4.0 * h2 * h2);
                        if (std::abs(H[k](i, j) - fd) > 1e-5 * (1.0 + std::abs(fd)))
                            throw std::invalid_argument(
                                "SmoothFunction: dxx disagrees with finite differences");
                    }
            }
        }
    }

    SmoothFunction s;
    s.a_dim_ = a_dim;
    s.x_dim_ = x_dim;
    s.out_dim_ = out_dim;
    s.smooth_ = smooth;
    s.desc_ = std::move(description);
    s.f_ = std::move(f);
    s.da_ = std::move(da);
    s.dx_ = std::move(dx);
    s.dxx_ = std::move(dxx);
    return s;
}

Eigen::MatrixXd SmoothFunction::da(const Eigen::VectorXd& a, const Eigen::VectorXd& x) const {
    if (a_dim_ == 0) return Eigen::MatrixXd::Zero(out_dim_, 0);
    return da_(a, x);
}

Eigen::MatrixXd SmoothFunction::dx(const Eigen::VectorXd& a, const Eigen::VectorXd& x) const {
    return dx_(a, x);
}

std::vector<Eigen::MatrixXd> SmoothFunction::dxx(const Eigen::VectorXd& a,
                                                 const Eigen::VectorXd& x) const {
    if (!dxx_) throw std::logic_error("SmoothFunction: second derivative not available (C1 only)");
    return dxx_(a, x);
}

Eigen::VectorXd SmoothFunction::apply_dxx(const Eigen::VectorXd& a, const Eigen::VectorXd& x,
                                          const Eigen::VectorXd& v, const Eigen::VectorXd& w) const {
    auto H = dxx(a, x);
    Eigen::VectorXd out(out_dim_);
    for (int k = 0; k < out_dim_; ++k) out[k] = v.dot(H[k] * w);
    return out;
}

SmoothFunction SmoothFunction::norm_sq(int d) {
    return make(
        0, d, 1, Smoothness::C12,
        [](const Eigen::VectorXd&, const Eigen::VectorXd& x) {
            Eigen::VectorXd v(1);
            v[0] = x.squaredNorm();
            return v;
        },
        nullptr,
        [](const Eigen::VectorXd&, const Eigen::VectorXd& x) {
            return Eigen::MatrixXd(2.0 * x.transpose());
        },
        [d](const Eigen::VectorXd&, const Eigen::VectorXd&) {
            return std::vector<Eigen::MatrixXd>{2.0 * Eigen::MatrixXd::Identity(d, d)};
        },
        "norm_sq");
}

SmoothFunction SmoothFunction::sin1d() {
    return make(
        0, 1, 1, Smoothness::C12,
        [](const Eigen::VectorXd&, const Eigen::VectorXd& x) {
            Eigen::VectorXd v(1);
            v[0] = std::sin(x[0]);
            return v;
        },
        nullptr,
        [](const Eigen::VectorXd&, const Eigen::VectorXd& x) {
            Eigen::MatrixXd m(1, 1);
            m(0, 0) = std::cos(x[0]);
            return m;
        },
        [](const Eigen::VectorXd&, const Eigen::VectorXd& x) {
            Eigen::MatrixXd m(1, 1);
            m(0, 0) = -std::sin(x[0]);
            return std::vector<Eigen::MatrixXd>{m};
        },
        "sin");
}

SmoothFunction SmoothFunction::linear(const Eigen::MatrixXd& M) {
    const int q = static_cast<int>(M.rows()), d = static_cast<int>(M.cols());
    return make(
        0, d, q, Smoothness::C12,
        [M](const Eigen::VectorXd&, const Eigen::VectorXd& x) { return Eigen::VectorXd(M * x); },
        nullptr, [M](const Eigen::VectorXd&, const Eigen::VectorXd&) { return M; },
        [q, d](const Eigen::VectorXd&, const Eigen::VectorXd&) {
            return std::vector<Eigen::MatrixXd>(q, Eigen::MatrixXd::Zero(d, d));
        },
        "linear");
}

SmoothFunction SmoothFunction::bilinear_ax() {
    return make(
        1, 1, 1, Smoothness::C12,
        [](const Eigen::VectorXd& a, const Eigen::VectorXd& x) {
            Eigen::VectorXd v(1);
            v[0] = a[0] * x[0];
            return v;
        },
        [](const Eigen::VectorXd&, const Eigen::VectorXd& x) {
            Eigen::MatrixXd m(1, 1);
            m(0, 0) = x[0];
            return m;
        },
        [](const Eigen::VectorXd& a, const Eigen::VectorXd&) {
            Eigen::MatrixXd m(1, 1);
            m(0, 0) = a[0];
            return m;
        },
        [](const Eigen::VectorXd&, const Eigen::VectorXd&) {
            return std::vector<Eigen::MatrixXd>{Eigen::MatrixXd::Zero(1, 1)};
        },
        "bilinear_ax");
}

SmoothFunction SmoothFunction::square1d() {
    return custom_poly({0.0, 0.0, 1.0});
}

SmoothFunction SmoothFunction::custom_poly(const std::vector<double>& coeff) {
    auto horner = [coeff](double x) {
        double v = 0.0;
        for (size_t k = coeff.size(); k-- > 0;) v = v * x + coeff[k];
        return v;
    };
    std::vector<double> d1, d2;
    for (size_t k = 1; k < coeff.size(); ++k) d1.push_back(k * coeff[k]);
    for (size_t k = 2; k < coeff.size(); ++k) d2.push_back(k * (k - 1) * coeff[k]);
    auto eval = [](const std::vector<double>& c, double x) {
        double v = 0.0;
        for (size_t k = c.size(); k-- > 0;) v = v * x + c[k];
        return v;
    };
    return make(
        0, 1, 1, Smoothness::C12,
        [horner](const Eigen::VectorXd&, const Eigen::VectorXd& x) {
            Eigen::VectorXd v(1);
            v[0] = horner(x[0]);
            return v;
        },
        nullptr,
        [eval, d1](const Eigen::VectorXd&, const Eigen::VectorXd& x) {
            Eigen::MatrixXd m(1, 1);
            m(0, 0) = eval(d1, x[0]);
            return m;
        },
        [eval, d2](const Eigen::VectorXd&, const Eigen::VectorXd& x) {
            Eigen::MatrixXd m(1, 1);
            m(0, 0) = eval(d2, x[0]);
            return std::vector<Eigen::MatrixXd>{m};
        },
        "custom_poly");
}

PathFunctional PathFunctional::time_independent(const SmoothFunction& F) {
    if (F.a_dim() != 0)
        throw std::invalid_argument("time_independent: function must not depend on a");
    Eigen::VectorXd a0(0);
    PathFunctional fp;
    fp.x_dim = F.x_dim();
    fp.out_dim = F.out_dim();
    fp.f = [F, a0](double, const Eigen::VectorXd& x) { return F.f(a0, x); };
    fp.dx = [F, a0](double, const Eigen::VectorXd& x) { return F.dx(a0, x); };
    fp.f_left = fp.f;
    fp.dx_left = fp.dx;
    return fp;
}

PathFunctional PathFunctional::from_smooth(const SmoothFunction& F, const FVPath& A) {
    if (A.dim() != F.a_dim()) throw std::invalid_argument("from_smooth: A dimension mismatch");
    PathFunctional fp;
    fp.x_dim = F.x_dim();
    fp.out_dim = F.out_dim();
    fp.f = [F, A](double t, const Eigen::VectorXd& x) { return F.f(A.value(t), x); };
    fp.dx = [F, A](double t, const Eigen::VectorXd& x) { return F.dx(A.value(t), x); };
    fp.f_left = [F, A](double t, const Eigen::VectorXd& x) {
        return F.f(t > 0.0 ? A.left_limit(t) : A.value(0.0), x);
    };
    fp.dx_left = [F, A](double t, const Eigen::VectorXd& x) {
        return F.dx(t > 0.0 ? A.left_limit(t) : A.value(0.0), x);
    };
    for (const auto& j : A.jumps()) fp.time_jumps.push_back(j.time);
    return fp;
}

double PathFunctional::variation_witness(double T, int n) const {
    std::vector<Eigen::VectorXd> pts = K_hat;
    if (pts.empty()) pts.push_back(Eigen::VectorXd::Zero(x_dim));
    double worst = 0.0;
    for (const auto& x : pts) {
        double v = 0.0;
        Eigen::VectorXd prev = f(0.0, x);
        for (int i = 1; i <= n; ++i) {
            Eigen::VectorXd cur = f(T * i / n, x);
            v += (cur - prev).norm();
            prev = cur;
        }
        worst = std::max(worst, v);
    }
    return worst;
}

Eigen::VectorXd follmer_integral(const std::function<Eigen::MatrixXd(double)>& xi,
                                 const CadlagPath& X, const Partition& pi, double t) {
    Eigen::MatrixXd first = xi(pi.points.front());
    KahanVec acc(static_cast<int>(first.rows()));
    const auto& pts = pi.points;
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
        const double r = pts[i];
        if (r >= t) break;
        const double s = std::min(pts[i + 1], t);
        acc.add((i == 0 ? first : xi(r)) * (X.value(s) - X.value(r)));
    }
    return acc.value();
}

Eigen::VectorXd follmer_integral(const CadlagPath& xi_flat, int q, const CadlagPath& X,
                                 const Partition& pi, double t) {
    const int d = X.dim();
    if (xi_flat.dim() != q * d) throw std::invalid_argument("follmer_integral: integrand shape");
    return follmer_integral(
        [&](double r) { return unflatten(xi_flat.value(r), q, d); }, X, pi, t);
}

Eigen::VectorXd stieltjes_against_qv(const std::function<Eigen::MatrixXd(double)>& xi_left,
                                     const QVPath& qv, double t, bool continuous_only) {
    Eigen::MatrixXd first = xi_left(0.0);
    KahanVec acc(static_cast<int>(first.rows()));
    const auto& grid = qv.path.grid();
    // The qv grid can be as coarse as the reporting times; refine each cell so
    // the left-endpoint rule resolves the integrand, not just the measure.
    const double T = std::max(qv.path.horizon(), 1e-300);
    std::vector<double> pts;
    for (size_t i = 0; i + 1 < grid.size(); ++i) {
        const double u = grid[i], v = grid[i + 1];
        const int k = std::max(1, static_cast<int>(std::ceil(1024.0 * (v - u) / T)));
        for (int j = 0; j < k; ++j) pts.push_back(u + (v - u) * j / k);
    }
    pts.push_back(grid.back());
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
        const double u = pts[i];
        if (u >= t) break;
        const double v = std::min(pts[i + 1], t);
        acc.add((i == 0 ? first : xi_left(u)) *
                (qv.path.continuous_value(v) - qv.path.continuous_value(u)));
    }
    if (!continuous_only) {
        for (const auto& j : qv.path.jumps()) {
            if (j.time > t) break;
            if (j.time > 0.0) acc.add(xi_left(j.time) * j.delta);
        }
    }
    return acc.value();
}

ConvergenceEstimate stieltjes_sum_limit(const CadlagPath& xi_flat, int q, const BilinearForm& B,
                                        const CadlagPath& X, const QVPath& qv,
                                        const PartitionSequence& seq, double t, double tolerance) {
    const int m = B.out_dim();
    if (xi_flat.dim() != q * m) throw std::invalid_argument("stieltjes_sum_limit: integrand shape");
    ConvergenceEstimate est;
    est.times = {t};
    est.level_labels = seq.labels;
    est.tolerance = tolerance;
    for (const auto& pi : seq.levels) {
        KahanVec acc(q);
        const auto& pts = pi.points;
        for (size_t i = 0; i + 1 < pts.size(); ++i) {
            const double r = pts[i];
            if (r >= t) break;
            const double s = std::min(pts[i + 1], t);
            Eigen::VectorXd d = X.value(s) - X.value(r);
            acc.add(unflatten(xi_flat.value(r), q, m) * B.apply(d, d));
        }
        est.values.push_back({acc.value()});
    }
    auto xi_left = [&](double s) {
        return unflatten(s > 0.0 ? xi_flat.left_limit(s) : xi_flat.value(0.0), q, m);
    };
    Eigen::VectorXd integral = stieltjes_against_qv(xi_left, qv, t, false);
    est.limit = {integral};
    est.cauchy_tail = (est.values.back()[0] - integral).norm() / (1.0 + integral.norm());
    est.verdict = est.cauchy_tail <= tolerance ? Verdict::Pass : Verdict::Inconclusive;
    return est;
}

namespace {

std::vector<double> union_jump_times(const CadlagPath& A, const CadlagPath& X) {
    std::set<double> s;
    for (const auto& j : A.jumps()) s.insert(j.time);
    for (const auto& j : X.jumps()) s.insert(j.time);
    return {s.begin(), s.end()};
}

}  // namespace

ItoRow ito_rhs(const SmoothFunction& f, const FVPath& A, const CadlagPath& X, const Partition& pi,
               int level_label, double t) {
    if (f.smoothness() != Smoothness::C12)
        throw std::invalid_argument("ito_rhs: change-of-variable formula requires a C12 function");
    const int q = f.out_dim();
    ItoRow row;
    row.level = level_label;
    row.t = t;
    const Eigen::VectorXd a0 = A.value(0.0), x0 = X.value(0.0);
    row.lhs = f.f(A.value(t), X.value(t)) - f.f(a0, x0);

    KahanVec term_a(q), term_x(q), term_qv(q), term_jump(q);
    const auto& pts = pi.points;
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
        const double r = pts[i];
        if (r >= t) break;
        const double s = std::min(pts[i + 1], t);
        const Eigen::VectorXd Ar = A.value(r), Xr = X.value(r);
        const Eigen::VectorXd dX = X.value(s) - Xr;
        if (f.a_dim() > 0)
            term_a.add(f.da(Ar, Xr) * (A.continuous_value(s) - A.continuous_value(r)));
        term_x.add(f.dx(Ar, Xr) * dX);
        term_qv.add(0.5 * f.apply_dxx(Ar, Xr, dX, dX));
    }
    for (double s : union_jump_times(A, X)) {
        if (s > t || s <= 0.0) continue;
        const Eigen::VectorXd Am = A.left_limit(s), Xm = X.left_limit(s);
        const Eigen::VectorXd dX = X.jump_at(s);
        term_qv.add(-0.5 * f.apply_dxx(Am, Xm, dX, dX));
        term_jump.add(f.f(A.value(s), X.value(s)) - f.f(Am, Xm) - f.dx(Am, Xm) * dX);
    }
    row.term_a = term_a.value();
    row.term_x = term_x.value();
    row.term_qv = term_qv.value();
    row.term_jump = term_jump.value();
    row.residual = row.lhs - row.term_a - row.term_x - row.term_qv - row.term_jump;
    return row;
}

ItoReport ito_profile(const SmoothFunction& f, const FVPath& A, const CadlagPath& X,
                      const PartitionSequence& seq, const std::vector<double>& reporting_times) {
    ItoReport rep;
    for (size_t n = 0; n < seq.size(); ++n)
        for (double t : reporting_times)
            rep.rows.push_back(ito_rhs(f, A, X, seq.level(n), seq.labels[n], t));
    return rep;
}

QVLimitResult c1_qv_direct(const PathFunctional& fp, const CadlagPath& X,
                           const PartitionSequence& seq,
                           const std::vector<double>& reporting_times,
                           const QVLimitOptions& opts) {
    if (fp.x_dim != X.dim()) throw std::invalid_argument("c1_qv_direct: dimension mismatch");
    const double T = X.horizon();

    std::set<double> jt(fp.time_jumps.begin(), fp.time_jumps.end());
    for (const auto& j : X.jumps()) jt.insert(j.time);
    std::vector<Jump> jumps;
    for (double s : jt) {
        if (s <= 0.0 || s > T) continue;
        Eigen::VectorXd dz = fp.f(s, X.value(s)) - fp.f_left(s, X.left_limit(s));
        jumps.push_back({s, std::move(dz)});
    }

    std::vector<double> grid = X.grid();
    const auto& fine = seq.levels.back().points;
    grid.insert(grid.end(), fine.begin(), fine.end());
    grid.insert(grid.end(), reporting_times.begin(), reporting_times.end());
    for (const auto& j : jumps) grid.push_back(j.time);
    grid.push_back(0.0);
    grid.push_back(T);
    grid = sorted_unique(std::move(grid));
    grid.erase(std::remove_if(grid.begin(), grid.end(),
                              [T](double u) { return u < 0.0 || u > T; }),
               grid.end());

    CadlagPath carrier = CadlagPath::pure_jump(T, fp.out_dim, jumps);
    std::vector<Eigen::VectorXd> cont(grid.size());
    for (size_t i = 0; i < grid.size(); ++i)
        cont[i] = fp.f(grid[i], X.value(grid[i])) - carrier.jump_sum(grid[i]);
    CadlagPath Z(std::move(grid), std::move(cont), std::move(jumps));

    return qv_limit(BilinearForm::outer(fp.out_dim), Z, Z, seq, reporting_times, opts);
}

namespace {

// Lift of M -> D M D^T acting on row-major-flattened matrices.
Eigen::MatrixXd tensor_square_lift(const Eigen::MatrixXd& D) {
    const int q = static_cast<int>(D.rows()), d = static_cast<int>(D.cols());
    Eigen::MatrixXd L(q * q, d * d);
    for (int k = 0; k < q; ++k)
        for (int l = 0; l < q; ++l)
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) L(k * q + l, i * d + j) = D(k, i) * D(l, j);
    return L;
}

}  // namespace

QVPath c1_qv_formula(const PathFunctional& fp, const CadlagPath& X, const QVPath& qv,
                     const std::vector<double>& reporting_times) {
    const int d = X.dim(), q = fp.out_dim;
    if (qv.mat_dim != d)
        throw std::invalid_argument("c1_qv_formula: needs a tensor (outer) QV path of X");

    auto lift_left = [&](double s) {
        Eigen::MatrixXd D = s > 0.0 ? fp.dx_left(s, X.left_limit(s)) : fp.dx(0.0, X.value(0.0));
        return tensor_square_lift(D);
    };

    std::set<double> jt(fp.time_jumps.begin(), fp.time_jumps.end());
    for (const auto& j : X.jumps()) jt.insert(j.time);
    std::vector<Jump> jumps;
    for (double s : jt) {
        if (s <= 0.0 || s > X.horizon()) continue;
        Eigen::VectorXd dz = fp.f(s, X.value(s)) - fp.f_left(s, X.left_limit(s));
        jumps.push_back({s, flatten(dz * dz.transpose())});
    }
    CadlagPath carrier = CadlagPath::pure_jump(X.horizon(), q * q, jumps);

    std::vector<Eigen::VectorXd> values;
    values.reserve(reporting_times.size());
    for (double t : reporting_times)
        values.push_back(stieltjes_against_qv(lift_left, qv, t, true) + carrier.jump_sum(t));
    return assemble_qv_path(reporting_times, values, std::move(jumps), q * q, q);
}

Eigen::VectorXd taylor_remainder(const PathFunctional& fp, const CadlagPath& X, const Partition& pi,
                                 size_t interval_index, double t) {
    if (interval_index + 1 >= pi.points.size())
        throw std::out_of_range("taylor_remainder: interval index");
    const double r = std::min(pi.points[interval_index], t);
    const double s = std::min(pi.points[interval_index + 1], t);
    const Eigen::VectorXd base = X.value(r);
    const Eigen::VectorXd dX = X.value(s) - base;
    std::vector<std::pair<double, double>> nodes;
    gl01(nodes);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(fp.out_dim);
    const Eigen::MatrixXd D0 = fp.dx(r, base);
    for (auto [theta, w] : nodes) out += w * ((fp.dx(r, base + theta * dX) - D0) * dX);
    return out;
}

QVPath c1_smooth_transform(const SmoothFunction& f, const FVPath& A, const CadlagPath& X,
                           const QVPath& qv, const std::vector<double>& reporting_times) {
    return c1_qv_formula(PathFunctional::from_smooth(f, A), X, qv, reporting_times);
}

IntegralQVResult integral_qv(const SmoothFunction& f, const FVPath& A, const CadlagPath& X,
                             const QVPath& qv, const PartitionSequence& seq,
                             const std::vector<double>& reporting_times,
                             const QVLimitOptions& opts) {
    const int d = X.dim(), q = f.out_dim();
    if (qv.mat_dim != d) throw std::invalid_argument("integral_qv: needs a tensor QV path of X");
    if (seq.size() < 4) throw std::invalid_argument("integral_qv: need at least 4 levels");

    // lhs: QV of the level-n Riemann-sum path Y_n along pi_n. Its increment over
    // I = ]r,s] is exactly Dxf(A_r, X_r) dX(I), so Q^{pi_n}(Y_n) has a closed
    // per-interval form and needs no composite-path construction.
    ConvergenceEstimate est;
    est.times = reporting_times;
    est.level_labels = seq.labels;
    est.tolerance = opts.tolerance;
    for (const auto& pi : seq.levels) {
        const auto& pts = pi.points;
        std::vector<Eigen::VectorXd> prof(reporting_times.size());
        KahanVec acc(q * q);
        size_t ti = 0;
        for (size_t i = 0; i + 1 < pts.size() && ti < reporting_times.size(); ++i) {
            const double r = pts[i], s = pts[i + 1];
            while (ti < reporting_times.size() && reporting_times[ti] <= r)
                prof[ti++] = acc.value();
            if (ti >= reporting_times.size()) break;
            const Eigen::MatrixXd D = f.dx(A.value(r), X.value(r));
            const Eigen::VectorXd Xr = X.value(r);
            for (; ti < reporting_times.size() && reporting_times[ti] < s; ++ti) {
                Eigen::VectorXd dy = D * (X.value(reporting_times[ti]) - Xr);
                prof[ti] = acc.value() + flatten(dy * dy.transpose());
            }
            Eigen::VectorXd dy = D * (X.value(s) - Xr);
            acc.add(flatten(dy * dy.transpose()));
            while (ti < reporting_times.size() && reporting_times[ti] == s)
                prof[ti++] = acc.value();
        }
        while (ti < reporting_times.size()) prof[ti++] = acc.value();
        est.values.push_back(std::move(prof));
    }
    const size_t L = est.values.size();
    double tail = 0.0;
    for (size_t k = 0; k < reporting_times.size(); ++k) {
        double scale = 1.0 + est.values[L - 1][k].norm();
        tail = std::max(tail, (est.values[L - 1][k] - est.values[L - 2][k]).norm() / scale);
        tail = std::max(tail, (est.values[L - 2][k] - est.values[L - 3][k]).norm() / scale);
    }
    est.cauchy_tail = tail;
    est.verdict = tail <= opts.tolerance ? Verdict::Pass : Verdict::Inconclusive;
    est.limit = est.values.back();

    std::vector<Jump> y_jumps;
    for (const auto& j : X.jumps()) {
        Eigen::MatrixXd Dm = f.dx(j.time > 0.0 ? A.left_limit(j.time) : A.value(0.0),
                                  j.time > 0.0 ? X.left_limit(j.time) : X.value(0.0));
        Eigen::VectorXd dy = Dm * j.delta;
        y_jumps.push_back({j.time, flatten(dy * dy.transpose())});
    }
    IntegralQVResult out;
    out.lhs.qv = assemble_qv_path(reporting_times, est.limit, y_jumps, q * q, q);
    out.lhs.estimate = std::move(est);

    auto lift_left = [&](double s) {
        Eigen::MatrixXd D = f.dx(s > 0.0 ? A.left_limit(s) : A.value(0.0),
                                 s > 0.0 ? X.left_limit(s) : X.value(0.0));
        return tensor_square_lift(D);
    };
    std::vector<Eigen::VectorXd> rhs_vals;
    rhs_vals.reserve(reporting_times.size());
    for (double t : reporting_times)
        rhs_vals.push_back(stieltjes_against_qv(lift_left, qv, t, false));
    out.rhs = assemble_qv_path(reporting_times, rhs_vals, y_jumps, q * q, q);

    for (size_t k = 0; k < reporting_times.size(); ++k)
        out.max_gap = std::max(out.max_gap, (out.lhs.estimate.values.back()[k] - rhs_vals[k]).norm() /
                                                (1.0 + rhs_vals[k].norm()));
    return out;
}

RoughFVDecomposition rough_fv_decompose(const SmoothFunction& f, const FVPath& A,
                                        const CadlagPath& X, const QVPath& qv,
                                        const PartitionSequence& seq,
                                        const std::vector<double>& reporting_times) {
    const int q = f.out_dim();
    const Partition& fine = seq.levels.back();
    const double T = X.horizon();

    std::vector<Jump> d_jumps, y_jumps;
    for (double s : union_jump_times(A, X)) {
        if (s <= 0.0 || s > T) continue;
        const Eigen::VectorXd Am = A.left_limit(s), Xm = X.left_limit(s);
        const Eigen::VectorXd dX = X.jump_at(s);
        Eigen::VectorXd dy = f.dx(Am, Xm) * dX;
        Eigen::VectorXd dd = f.f(A.value(s), X.value(s)) - f.f(Am, Xm) - dy;
        if (dy.norm() > 0.0) y_jumps.push_back({s, std::move(dy)});
        d_jumps.push_back({s, std::move(dd)});
    }
    FVPath D = CadlagPath::pure_jump(T, q, d_jumps);

    auto d2_left = [&](double s) {
        const Eigen::VectorXd a = s > 0.0 ? A.left_limit(s) : A.value(0.0);
        const Eigen::VectorXd x = s > 0.0 ? X.left_limit(s) : X.value(0.0);
        auto H = f.dxx(a, x);
        const int d = X.dim();
        Eigen::MatrixXd M(q, d * d);
        for (int k = 0; k < q; ++k)
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) M(k, i * d + j) = H[k](i, j);
        return M;
    };

    std::vector<double> grid = reporting_times;
    if (grid.empty() || grid.front() > 0.0) grid.insert(grid.begin(), 0.0);
    std::vector<Eigen::VectorXd> c_vals(grid.size()), y_vals(grid.size());
    for (size_t i = 0; i < grid.size(); ++i) {
        const double t = grid[i];
        KahanVec term_a(q);
        for (size_t k = 0; k + 1 < fine.points.size(); ++k) {
            const double r = fine.points[k];
            if (r >= t) break;
            const double s = std::min(fine.points[k + 1], t);
            if (f.a_dim() > 0)
                term_a.add(f.da(A.value(r), X.value(r)) *
                           (A.continuous_value(s) - A.continuous_value(r)));
        }
        c_vals[i] = term_a.value() + 0.5 * stieltjes_against_qv(d2_left, qv, t, true);
        y_vals[i] = follmer_integral(
            [&](double r) { return f.dx(A.value(r), X.value(r)); }, X, fine, t);
    }
    FVPath C(grid, c_vals, {});

    CadlagPath carrier = CadlagPath::pure_jump(T, q, y_jumps);
    std::vector<Eigen::VectorXd> y_cont(grid.size());
    for (size_t i = 0; i < grid.size(); ++i) y_cont[i] = y_vals[i] - carrier.jump_sum(grid[i]);
    CadlagPath Y(grid, std::move(y_cont), std::move(y_jumps));

    RoughFVDecomposition out{std::move(Y), std::move(C), std::move(D), 0.0};
    const Eigen::VectorXd f0 = f.f(A.value(0.0), X.value(0.0));
    for (double t : reporting_times) {
        Eigen::VectorXd lhs = f.f(A.value(t), X.value(t)) - f0;
        Eigen::VectorXd rhs = out.Y.value(t) + out.C.value(t) + out.D.value(t);
        out.max_reconstruction_error = std::max(out.max_reconstruction_error, (lhs - rhs).norm());
    }
    return out;
}

}  // namespace qv
