#include "qv/path.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qv {

namespace {

void check_time(double t, double T, double lo = 0.0) {
    if (!(t >= lo && t <= T)) throw std::domain_error("time outside path domain");
}

}  // namespace

CadlagPath::CadlagPath(std::vector<double> grid, std::vector<Eigen::VectorXd> samples,
                       std::vector<Jump> jumps, Interp interp)
    : grid_(std::move(grid)), samples_(std::move(samples)), jumps_(std::move(jumps)),
      interp_(interp) {
    if (grid_.size() < 2 || grid_.size() != samples_.size())
        throw std::invalid_argument("grid and samples must match, with at least two points");
    if (grid_.front() != 0.0) throw std::invalid_argument("grid must start at 0");
    for (size_t i = 1; i < grid_.size(); ++i)
        if (!(grid_[i] > grid_[i - 1])) throw std::invalid_argument("grid must be strictly increasing");
    dim_ = static_cast<int>(samples_.front().size());
    for (const auto& s : samples_)
        if (s.size() != dim_) throw std::invalid_argument("inconsistent sample dimension");

    std::sort(jumps_.begin(), jumps_.end(),
              [](const Jump& a, const Jump& b) { return a.time < b.time; });
    const double T = grid_.back();
    double prev = 0.0;
    for (const auto& j : jumps_) {
        if (!(j.time > 0.0 && j.time <= T)) throw std::invalid_argument("jump time outside ]0,T]");
        if (j.time == prev) throw std::invalid_argument("duplicate jump time");
        if (j.delta.size() != dim_) throw std::invalid_argument("jump dimension mismatch");
        prev = j.time;
    }
    jump_prefix_.resize(jumps_.size());
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(dim_);
    for (size_t i = 0; i < jumps_.size(); ++i) {
        acc += jumps_[i].delta;
        jump_prefix_[i] = acc;
    }
}

CadlagPath CadlagPath::pure_jump(double horizon, int dim, std::vector<Jump> jumps) {
    std::vector<double> grid{0.0, horizon};
    std::vector<Eigen::VectorXd> samples{Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Zero(dim)};
    return CadlagPath(std::move(grid), std::move(samples), std::move(jumps));
}

CadlagPath CadlagPath::constant(double horizon, const Eigen::VectorXd& v) {
    return CadlagPath({0.0, horizon}, {v, v}, {});
}

Eigen::VectorXd CadlagPath::continuous_value(double t) const {
    check_time(t, horizon());
    auto it = std::upper_bound(grid_.begin(), grid_.end(), t);
    size_t i = static_cast<size_t>(it - grid_.begin());  // first index with grid > t
    if (i == grid_.size()) return samples_.back();
    // grid_[i-1] <= t < grid_[i]
    size_t lo = i - 1;
    if (interp_ == Interp::PiecewiseConstantRight) return samples_[lo];
    if (t == grid_[lo]) return samples_[lo];
    const double w = (t - grid_[lo]) / (grid_[i] - grid_[lo]);
    return samples_[lo] + w * (samples_[i] - samples_[lo]);
}

Eigen::VectorXd CadlagPath::continuous_left(double t) const {
    check_time(t, horizon());
    if (t <= 0.0) throw std::domain_error("no left limit at 0");
    if (interp_ == Interp::PiecewiseLinear) return continuous_value(t);
    // Step part: left limit at a grid point is the previous sample.
    auto it = std::lower_bound(grid_.begin(), grid_.end(), t);
    if (it != grid_.end() && *it == t) {
        size_t i = static_cast<size_t>(it - grid_.begin());
        return samples_[i - 1];
    }
    return continuous_value(t);
}

Eigen::VectorXd CadlagPath::jump_sum(double t) const {
    // sum over jump times <= t
    auto it = std::upper_bound(jumps_.begin(), jumps_.end(), t,
                               [](double v, const Jump& j) { return v < j.time; });
    size_t n = static_cast<size_t>(it - jumps_.begin());
    if (n == 0) return Eigen::VectorXd::Zero(dim_);
    return jump_prefix_[n - 1];
}

Eigen::VectorXd CadlagPath::jump_sum_before(double t) const {
    auto it = std::lower_bound(jumps_.begin(), jumps_.end(), t,
                               [](const Jump& j, double v) { return j.time < v; });
    size_t n = static_cast<size_t>(it - jumps_.begin());
    if (n == 0) return Eigen::VectorXd::Zero(dim_);
    return jump_prefix_[n - 1];
}

Eigen::VectorXd CadlagPath::jump_at(double t) const {
    auto it = std::lower_bound(jumps_.begin(), jumps_.end(), t,
                               [](const Jump& j, double v) { return j.time < v; });
    if (it != jumps_.end() && it->time == t) return it->delta;
    return Eigen::VectorXd::Zero(dim_);
}

bool CadlagPath::has_jump_at(double t) const {
    auto it = std::lower_bound(jumps_.begin(), jumps_.end(), t,
                               [](const Jump& j, double v) { return j.time < v; });
    return it != jumps_.end() && it->time == t;
}

Eigen::VectorXd CadlagPath::value(double t) const {
    return continuous_value(t) + jump_sum(t);
}

Eigen::VectorXd CadlagPath::left_limit(double t) const {
    if (t <= 0.0) throw std::domain_error("no left limit at 0");
    check_time(t, horizon());
    return continuous_left(t) + jump_sum_before(t);
}

JumpSet jump_set(const CadlagPath& path, double eps, Norm norm) {
    if (eps < 0.0) throw std::domain_error("threshold must be >= 0");
    JumpSet out{eps, {}};
    for (const auto& j : path.jumps())
        if (vector_norm(j.delta, norm) > eps) out.times.push_back(j.time);
    return out;
}

JumpTruncation truncate_jumps(const CadlagPath& path, double eps, Norm norm) {
    if (eps < 0.0) throw std::domain_error("threshold must be >= 0");
    std::vector<Jump> big, small;
    for (const auto& j : path.jumps())
        (vector_norm(j.delta, norm) > eps ? big : small).push_back(j);
    FVPath J = CadlagPath::pure_jump(path.horizon(), path.dim(), std::move(big));
    CadlagPath residual(path.grid(), path.samples(), std::move(small), path.interp());
    return {std::move(J), std::move(residual)};
}

namespace {

// Diameter of a finite point set under the given norm.
double diameter(const std::vector<Eigen::VectorXd>& pts, Norm norm) {
    if (pts.size() < 2) return 0.0;
    const int d = static_cast<int>(pts.front().size());
    if (d == 1) {
        double lo = pts[0][0], hi = pts[0][0];
        for (const auto& p : pts) { lo = std::min(lo, p[0]); hi = std::max(hi, p[0]); }
        return hi - lo;
    }
    if (norm == Norm::LInf) {
        double best = 0.0;
        for (int c = 0; c < d; ++c) {
            double lo = pts[0][c], hi = pts[0][c];
            for (const auto& p : pts) { lo = std::min(lo, p[c]); hi = std::max(hi, p[c]); }
            best = std::max(best, hi - lo);
        }
        return best;
    }
    if (norm == Norm::L1 && d <= 10) {
        // L1 diameter = max over sign vectors sigma of the spread of sigma.x
        double best = 0.0;
        const int patterns = 1 << (d - 1);  // sigma_0 fixed to +1 by symmetry
        for (int m = 0; m < patterns; ++m) {
            double lo = 0.0, hi = 0.0;
            bool first = true;
            for (const auto& p : pts) {
                double v = p[0];
                for (int c = 1; c < d; ++c) v += ((m >> (c - 1)) & 1) ? -p[c] : p[c];
                if (first) { lo = hi = v; first = false; }
                else { lo = std::min(lo, v); hi = std::max(hi, v); }
            }
            best = std::max(best, hi - lo);
        }
        return best;
    }
    double best = 0.0;
    for (size_t i = 0; i + 1 < pts.size(); ++i)
        for (size_t j = i + 1; j < pts.size(); ++j)
            best = std::max(best, vector_norm(pts[i] - pts[j], norm));
    return best;
}

}  // namespace

double oscillation(const CadlagPath& path, const TimeInterval& iv, Norm norm) {
    if (iv.empty()) return 0.0;
    const double T = path.horizon();
    const double a = std::max(0.0, iv.a), b = std::min(T, iv.b);
    if (b < a) return 0.0;
    if (a == b) return 0.0;  // single point (or empty after clipping)

    std::vector<Eigen::VectorXd> cands;
    // Values just right of a approach value(a) by right continuity, so value(a)
    // is a valid sup candidate whether or not a is included.
    cands.push_back(path.value(a));
    bool right_in = iv.closed_right || b < iv.b;  // clipped endpoint is interior
    if (right_in) cands.push_back(path.value(b));
    cands.push_back(path.left_limit(b));

    auto push_interior = [&](double u) {
        if (u > a && u < b) {
            cands.push_back(path.value(u));
            cands.push_back(path.left_limit(u));
        }
    };
    const auto& g = path.grid();
    auto it = std::upper_bound(g.begin(), g.end(), a);
    for (; it != g.end() && *it < b; ++it) push_interior(*it);
    for (const auto& j : path.jumps()) {
        if (j.time >= b) break;
        if (j.time > a) push_interior(j.time);
    }
    return diameter(cands, norm);
}

double total_variation(const CadlagPath& path, double a, double b,
                       const std::function<double(const Eigen::VectorXd&)>& value_norm) {
    const double T = path.horizon();
    check_time(a, T);
    check_time(b, T);
    if (b <= a) return 0.0;

    double var = 0.0;
    const auto& g = path.grid();
    if (path.interp() == Interp::PiecewiseLinear) {
        Eigen::VectorXd prev = path.continuous_value(a);
        auto it = std::upper_bound(g.begin(), g.end(), a);
        for (; it != g.end() && *it < b; ++it) {
            Eigen::VectorXd cur = path.continuous_value(*it);
            var += value_norm(cur - prev);
            prev = std::move(cur);
        }
        var += value_norm(path.continuous_value(b) - prev);
    } else {
        // Step continuous part: increments at grid points in ]a,b].
        auto it = std::upper_bound(g.begin(), g.end(), a);
        for (; it != g.end() && *it <= b; ++it) {
            size_t i = static_cast<size_t>(it - g.begin());
            if (i > 0) var += value_norm(path.samples()[i] - path.samples()[i - 1]);
        }
    }
    for (const auto& j : path.jumps())
        if (j.time > a && j.time <= b) var += value_norm(j.delta);
    return var;
}

double total_variation(const CadlagPath& path, double a, double b, Norm norm) {
    return total_variation(path, a, b,
                           [norm](const Eigen::VectorXd& v) { return vector_norm(v, norm); });
}

double family_variation(const std::vector<CadlagPath>& family, double a, double b, Norm norm) {
    if (family.empty()) throw std::domain_error("family_variation: empty family");
    double best = 0.0;
    for (const auto& f : family) best = std::max(best, total_variation(f, a, b, norm));
    return best;
}

}  // namespace qv
