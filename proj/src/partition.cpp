#include "qv/partition.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace qv {

Partition::Partition(std::vector<double> pts) : points(std::move(pts)) {
    if (points.size() < 2) throw std::invalid_argument("partition needs at least two points");
    if (points.front() != 0.0) throw std::invalid_argument("partition must start at 0");
    for (size_t i = 1; i < points.size(); ++i)
        if (!(points[i] > points[i - 1]))
            throw std::invalid_argument("partition points must be strictly increasing");
}

double Partition::mesh() const {
    double m = 0.0;
    for (size_t i = 1; i < points.size(); ++i) m = std::max(m, points[i] - points[i - 1]);
    return m;
}

size_t Partition::locate(double t) const {
    if (!(t > 0.0 && t <= horizon())) throw std::domain_error("locate: t outside ]0,T]");
    auto it = std::lower_bound(points.begin(), points.end(), t);
    // points[i-1] < t <= points[i]; interval index i-1
    return static_cast<size_t>(it - points.begin()) - 1;
}

Partition Partition::uniform(double T, size_t n) {
    if (n == 0) throw std::invalid_argument("uniform partition needs >= 1 interval");
    std::vector<double> pts(n + 1);
    for (size_t i = 0; i <= n; ++i) pts[i] = T * static_cast<double>(i) / static_cast<double>(n);
    pts[0] = 0.0;
    pts[n] = T;
    return Partition(std::move(pts));
}

Partition Partition::dyadic(double T, int level) {
    if (level < 0) throw std::invalid_argument("dyadic level must be >= 0");
    return uniform(T, size_t{1} << level);
}

PartitionSequence dyadic_sequence(double T, int n_max) {
    return dyadic_range(T, 0, n_max);
}

PartitionSequence dyadic_range(double T, int n_min, int n_max) {
    if (n_min < 0 || n_max < n_min) throw std::invalid_argument("bad dyadic range");
    PartitionSequence seq{"dyadic", T, {}, {}};
    for (int n = n_min; n <= n_max; ++n) {
        seq.levels.push_back(Partition::dyadic(T, n));
        seq.labels.push_back(n);
    }
    return seq;
}

PartitionSequence uniform_mesh_sequence(double T, const std::vector<size_t>& counts) {
    if (counts.empty()) throw std::invalid_argument("empty count list");
    PartitionSequence seq{"uniform", T, {}, {}};
    size_t prev = 0;
    for (size_t n : counts) {
        if (n <= prev) throw std::invalid_argument("interval counts must be strictly increasing");
        seq.levels.push_back(Partition::uniform(T, n));
        seq.labels.push_back(static_cast<int>(n));
        prev = n;
    }
    return seq;
}

PartitionSequence explicit_sequence(std::vector<Partition> levels) {
    if (levels.empty()) throw std::invalid_argument("empty level list");
    PartitionSequence seq{"explicit", levels.front().horizon(), std::move(levels), {}};
    for (size_t i = 0; i < seq.levels.size(); ++i) {
        if (seq.levels[i].horizon() != seq.horizon)
            throw std::invalid_argument("levels must share a horizon");
        seq.labels.push_back(static_cast<int>(i));
    }
    return seq;
}

double osc_along(const CadlagPath& path, const Partition& pi, double t, Side side, Norm norm) {
    double best = 0.0;
    for (size_t i = 0; i + 1 < pi.points.size(); ++i) {
        const double r = pi.points[i], s = pi.points[i + 1];
        if (r >= t) break;
        TimeInterval iv = (side == Side::Plus) ? TimeInterval::left_open(r, std::min(s, t))
                                               : TimeInterval::right_open(r, std::min(s, t));
        // ]r,s] cap [0,t]: for t < s the piece ]r,t] is closed at t.
        if (side == Side::Plus && t < s) iv.closed_right = true;
        if (side == Side::Minus && t < s) iv.closed_right = true;  // [r,s[ cap [0,t] = [r,t]
        best = std::max(best, oscillation(path, iv, norm));
    }
    return best;
}

namespace {

double family_osc(const std::vector<CadlagPath>& family, double r, double s, Norm norm) {
    double m = 0.0;
    for (const auto& f : family)
        m = std::max(m, oscillation(f, TimeInterval::right_open(r, s), norm));
    return m;
}

}  // namespace

PartitionSequence oscillation_controlled_sequence(const std::vector<CadlagPath>& family,
                                                  const std::vector<double>& eps_schedule,
                                                  Norm norm) {
    if (family.empty()) throw std::invalid_argument("empty path family");
    if (eps_schedule.empty()) throw std::invalid_argument("empty eps schedule");
    for (size_t i = 0; i < eps_schedule.size(); ++i) {
        if (eps_schedule[i] <= 0.0) throw std::invalid_argument("eps must be positive");
        if (i > 0 && !(eps_schedule[i] < eps_schedule[i - 1]))
            throw std::invalid_argument("eps schedule must be strictly decreasing");
    }
    const double T = family.front().horizon();
    for (const auto& f : family)
        if (f.horizon() != T) throw std::invalid_argument("family must share a horizon");

    // Candidate cut points: all breakpoints of all paths, plus T.
    std::set<double> cand_set;
    for (const auto& f : family) {
        for (double g : f.grid()) cand_set.insert(g);
        for (const auto& j : f.jumps()) cand_set.insert(j.time);
    }
    cand_set.insert(T);
    std::vector<double> cand(cand_set.begin(), cand_set.end());

    PartitionSequence seq{"osc", T, {}, {}};
    for (size_t k = 0; k < eps_schedule.size(); ++k) {
        const double eps = eps_schedule[k];
        std::vector<double> pts{0.0};
        double r = 0.0;
        while (r < T) {
            if (family_osc(family, r, T, norm) < eps) {
                pts.push_back(T);
                break;
            }
            // Largest candidate s > r with osc on [r,s[ < eps; osc is monotone in s.
            auto lo_it = std::upper_bound(cand.begin(), cand.end(), r);
            if (lo_it == cand.end()) throw std::runtime_error("oscillation-controlled: ran out of cut points");
            size_t lo = static_cast<size_t>(lo_it - cand.begin());
            if (!(family_osc(family, r, cand[lo], norm) < eps))
                throw std::runtime_error(
                    "oscillation-controlled: eps below the oscillation resolution of the "
                    "path discretization; use a finer path grid");
            size_t hi = cand.size() - 1;  // known to fail (osc to T >= eps)
            while (hi - lo > 1) {
                size_t mid = (lo + hi) / 2;
                if (family_osc(family, r, cand[mid], norm) < eps) lo = mid;
                else hi = mid;
            }
            pts.push_back(cand[lo]);
            r = cand[lo];
        }
        seq.levels.emplace_back(std::move(pts));
        seq.labels.push_back(static_cast<int>(k));
    }
    return seq;
}

}  // namespace qv
