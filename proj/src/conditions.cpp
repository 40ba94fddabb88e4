#include "qv/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace qv {

std::string to_string(Condition c) {
    switch (c) {
        case Condition::C1: return "C1";
        case Condition::C2: return "C2";
        case Condition::C3: return "C3";
        case Condition::LeftApprox: return "LeftApprox";
        case Condition::UC1: return "UC1";
        case Condition::UC2: return "UC2";
        case Condition::UC3: return "UC3";
    }
    return "?";
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "Pass";
        case Verdict::Fail: return "Fail";
        case Verdict::Inconclusive: return "Inconclusive";
    }
    return "?";
}

namespace {

bool tail_decreasing(const std::vector<double>& e) {
    if (e.size() < 3) return false;
    size_t n = e.size();
    return e[n - 1] < e[n - 2] && e[n - 2] < e[n - 3];
}

// (C1)/(UC1): eventually every interval holds at most one large jump.
ConditionReport check_one(const PartitionSequence& seq, const std::vector<CadlagPath>& family,
                          const std::vector<double>& t_grid, const std::vector<double>& eps_grid,
                          const ConditionOptions& opts, Condition label) {
    ConditionReport rep{label, Verdict::Pass, std::nullopt, eps_grid, t_grid, opts.tolerance};
    for (double eps : eps_grid) {
        std::set<double> big;
        for (const auto& f : family)
            for (double s : jump_set(f, eps, opts.norm).times) big.insert(s);
        if (big.size() < 2) continue;
        std::vector<double> times(big.begin(), big.end());
        // The condition quantifies over t; checking at t = T covers all smaller t.
        const Partition& last = seq.levels.back();
        for (size_t i = 0; i + 1 < times.size(); ++i) {
            if (last.locate(times[i]) == last.locate(times[i + 1])) {
                size_t idx = last.locate(times[i]);
                rep.verdict = Verdict::Fail;
                rep.witness = Witness{seq.labels.back(), last.points[idx], last.points[idx + 1],
                                      eps, "two jumps > eps share one interval at the finest level"};
                return rep;
            }
        }
    }
    return rep;
}

// (C2)/(UC2): interval increments capture the jumps.
ConditionReport check_two(const PartitionSequence& seq, const std::vector<CadlagPath>& family,
                          const std::vector<double>& t_grid, const std::vector<double>& eps_grid,
                          const ConditionOptions& opts, Condition label) {
    ConditionReport rep{label, Verdict::Pass, std::nullopt, eps_grid, t_grid, opts.tolerance};
    struct Probe { const CadlagPath* f; double s; double t; };
    std::vector<Probe> probes;
    const double T = seq.horizon;
    std::set<double> all_jump_times;
    for (const auto& f : family)
        for (const auto& j : f.jumps()) all_jump_times.insert(j.time);
    for (const auto& f : family) {
        for (double s : all_jump_times) {
            probes.push_back({&f, s, T});
            for (double t : t_grid)
                if (t >= s && t < T) probes.push_back({&f, s, t});
        }
    }
    if (probes.empty()) return rep;  // vacuous

    std::vector<double> err(seq.size(), 0.0);
    Witness worst;
    for (size_t n = 0; n < seq.size(); ++n) {
        const Partition& pi = seq.level(n);
        for (const auto& p : probes) {
            double lo = pi.lower(p.s), hi = pi.upper(p.s);
            Eigen::VectorXd inc = p.f->value(std::min(hi, p.t)) - p.f->value(std::min(lo, p.t));
            double e = vector_norm(inc - p.f->jump_at(p.s), opts.norm);
            if (e > err[n]) {
                err[n] = e;
                if (n + 1 == seq.size())
                    worst = Witness{seq.labels[n], p.s, p.t, e, "worst jump-capture error"};
            }
        }
    }
    if (err.back() < opts.tolerance) {
        rep.verdict = Verdict::Pass;
        rep.witness = worst;
        rep.witness->note = "largest residual at finest level (passing)";
    } else if (tail_decreasing(err)) {
        rep.verdict = Verdict::Inconclusive;
        rep.witness = worst;
    } else {
        rep.verdict = Verdict::Fail;
        rep.witness = worst;
    }
    return rep;
}

// (C3)/(UC3): small-jump oscillation vanishes (iterated limsup, sampled).
ConditionReport check_three(const PartitionSequence& seq, const std::vector<CadlagPath>& family,
                            const std::vector<double>& t_grid, const std::vector<double>& eps_grid,
                            const ConditionOptions& opts, Condition label) {
    ConditionReport rep{label, Verdict::Inconclusive, std::nullopt, eps_grid, t_grid, opts.tolerance};
    if (eps_grid.empty()) throw std::invalid_argument("C3 needs a threshold grid");
    const double T = seq.horizon;
    const size_t L = seq.size();
    const size_t tail_len = std::min<size_t>(3, L);

    std::vector<std::vector<double>> m(eps_grid.size(), std::vector<double>(L, 0.0));
    for (size_t k = 0; k < eps_grid.size(); ++k) {
        std::vector<CadlagPath> residuals;
        residuals.reserve(family.size());
        for (const auto& f : family)
            residuals.push_back(truncate_jumps(f, eps_grid[k], opts.norm).residual);
        for (size_t n = 0; n < L; ++n) {
            double v = 0.0;
            for (const auto& r : residuals)
                v = std::max(v, osc_along(r, seq.level(n), T, Side::Plus, opts.norm));
            m[k][n] = v;
        }
    }
    std::vector<double> tail(eps_grid.size(), 0.0);
    for (size_t k = 0; k < eps_grid.size(); ++k)
        tail[k] = *std::max_element(m[k].end() - static_cast<long>(tail_len), m[k].end());

    bool tail_monotone = true;
    for (size_t k = 1; k < eps_grid.size(); ++k)
        if (tail[k] > tail[k - 1] + opts.tolerance) tail_monotone = false;

    if (tail.back() < opts.tolerance && tail_monotone) {
        rep.verdict = Verdict::Pass;
    } else if (!tail_monotone && !tail_decreasing(m.back())) {
        rep.verdict = Verdict::Fail;
        rep.witness = Witness{seq.labels.back(), eps_grid.back(), T, tail.back(),
                              "small-jump oscillation tail not shrinking"};
    } else {
        rep.verdict = Verdict::Inconclusive;
        rep.witness = Witness{seq.labels.back(), eps_grid.back(), T, tail.back(),
                              "tail above tolerance at the finest level"};
    }
    return rep;
}

}  // namespace

std::array<ConditionReport, 3> check_condition_C(const PartitionSequence& seq,
                                                 const CadlagPath& path,
                                                 const std::vector<double>& t_grid,
                                                 const std::vector<double>& eps_grid,
                                                 const ConditionOptions& opts) {
    std::vector<CadlagPath> fam{path};
    return {check_one(seq, fam, t_grid, eps_grid, opts, Condition::C1),
            check_two(seq, fam, t_grid, eps_grid, opts, Condition::C2),
            check_three(seq, fam, t_grid, eps_grid, opts, Condition::C3)};
}

std::array<ConditionReport, 3> check_UC(const PartitionSequence& seq,
                                        const std::vector<CadlagPath>& family,
                                        const std::vector<double>& t_grid,
                                        const std::vector<double>& eps_grid,
                                        const ConditionOptions& opts) {
    if (family.empty()) throw std::domain_error("check_UC: empty family");
    return {check_one(seq, family, t_grid, eps_grid, opts, Condition::UC1),
            check_two(seq, family, t_grid, eps_grid, opts, Condition::UC2),
            check_three(seq, family, t_grid, eps_grid, opts, Condition::UC3)};
}

ConditionReport check_left_approximation(const PartitionSequence& seq, const CadlagPath& path,
                                         const std::vector<double>& t_grid,
                                         const ConditionOptions& opts) {
    ConditionReport rep{Condition::LeftApprox, Verdict::Pass, std::nullopt, {}, t_grid,
                        opts.tolerance};
    std::vector<double> err(seq.size(), 0.0);
    Witness worst;
    bool any = false;
    for (size_t n = 0; n < seq.size(); ++n) {
        const Partition& pi = seq.level(n);
        for (double t : t_grid) {
            if (!(t > 0.0 && t <= seq.horizon)) continue;
            any = true;
            double e = vector_norm(path.value(pi.lower(t)) - path.left_limit(t), opts.norm);
            if (e > err[n]) {
                err[n] = e;
                if (n + 1 == seq.size())
                    worst = Witness{seq.labels[n], t, t, e, "worst left-approximation error"};
            }
        }
    }
    if (!any) return rep;
    if (err.back() < opts.tolerance) {
        rep.verdict = Verdict::Pass;
    } else if (tail_decreasing(err)) {
        rep.verdict = Verdict::Inconclusive;
        rep.witness = worst;
    } else {
        rep.verdict = Verdict::Fail;
        rep.witness = worst;
    }
    return rep;
}

}  // namespace qv
