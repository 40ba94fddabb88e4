#include <doctest.h>

#include <cmath>

#include "qv/conditions.hpp"

using namespace qv;

namespace {

Eigen::VectorXd v1(double a) {
    Eigen::VectorXd v(1);
    v << a;
    return v;
}

CadlagPath smooth_path(int n = 256) {
    std::vector<double> grid;
    std::vector<Eigen::VectorXd> samples;
    for (int i = 0; i <= n; ++i) {
        double t = static_cast<double>(i) / n;
        grid.push_back(t);
        samples.push_back(v1(std::sin(3.0 * t)));
    }
    return CadlagPath(grid, samples, {});
}

const std::vector<double> kTGrid{0.25, 0.5, 0.75, 1.0};
const std::vector<double> kEpsGrid{0.5, 0.1, 0.02};

}  // namespace

TEST_CASE("continuous path on dyadic sequence: all conditions pass") {
    auto seq = dyadic_sequence(1.0, 10);
    auto rep = check_condition_C(seq, smooth_path(), kTGrid, kEpsGrid, {});
    CHECK(rep[0].verdict == Verdict::Pass);  // C1 vacuous
    CHECK(rep[1].verdict == Verdict::Pass);  // C2 vacuous
    ConditionOptions c3opts;
    c3opts.tolerance = 0.05;  // uniform-continuity scale at mesh 2^-10
    auto rep3 = check_condition_C(seq, smooth_path(), kTGrid, kEpsGrid, c3opts);
    CHECK(rep3[2].verdict == Verdict::Pass);
}

TEST_CASE("single jump at 1/3: jump capture is exact once the mesh separates it") {
    CadlagPath X = CadlagPath::pure_jump(1.0, 1, {{1.0 / 3.0, v1(2)}});
    auto seq = dyadic_sequence(1.0, 10);
    auto rep = check_condition_C(seq, X, kTGrid, kEpsGrid, {});
    CHECK(rep[0].verdict == Verdict::Pass);
    CHECK(rep[1].verdict == Verdict::Pass);
    REQUIRE(rep[1].witness.has_value());
    CHECK(rep[1].witness->value < 1e-9);  // delta X captured exactly for a pure step
}

TEST_CASE("twin jumps in one coarse interval: C1 fails with witness") {
    double s1 = 0.4, s2 = 0.4 + std::ldexp(1.0, -12);
    CadlagPath X = CadlagPath::pure_jump(1.0, 1, {{s1, v1(1)}, {s2, v1(1)}});
    auto seq = dyadic_sequence(1.0, 8);
    auto rep = check_condition_C(seq, X, kTGrid, {0.5}, {});
    CHECK(rep[0].verdict == Verdict::Fail);
    REQUIRE(rep[0].witness.has_value());
    CHECK(rep[0].witness->time_a <= s1);
    CHECK(rep[0].witness->time_b >= s2);
}

TEST_CASE("left approximation along dyadic sequences") {
    auto seq = dyadic_sequence(1.0, 12);
    ConditionOptions opts;
    opts.tolerance = 1e-3;  // linear interpolant left-approximates at mesh rate
    auto rep = check_left_approximation(seq, smooth_path(1024), {0.3141, 0.7, 0.9999}, opts);
    CHECK(rep.verdict == Verdict::Pass);
}

TEST_CASE("frozen left endpoint: left approximation fails with witness") {
    // Every level keeps lower(s) stuck at s - 0.1 while the path moves on
    // ]s-0.1, s[; X(lower(t)) cannot reach the left limit.
    const double s = 0.5;
    std::vector<Partition> levels;
    for (int n = 0; n < 4; ++n) {
        std::vector<double> pts{0.0, s - 0.1, s, 1.0};
        // refine away from the frozen gap
        pts.insert(pts.begin() + 1, (s - 0.1) / (2 + n));
        std::sort(pts.begin(), pts.end());
        levels.push_back(Partition(pts));
    }
    auto seq = explicit_sequence(levels);
    CadlagPath X({0.0, s - 0.1, s, 1.0}, {v1(0), v1(0), v1(1), v1(1)}, {});
    auto rep = check_left_approximation(seq, X, {s}, {});
    CHECK(rep.verdict == Verdict::Fail);
    REQUIRE(rep.witness.has_value());
    CHECK(rep.witness->time_a == s);
}

TEST_CASE("UC on a singleton family equals C field-for-field") {
    CadlagPath X = CadlagPath::pure_jump(1.0, 1, {{0.3, v1(1.5)}});
    auto seq = dyadic_sequence(1.0, 9);
    auto c = check_condition_C(seq, X, kTGrid, kEpsGrid, {});
    auto uc = check_UC(seq, {X}, kTGrid, kEpsGrid, {});
    for (int i = 0; i < 3; ++i) {
        CHECK(uc[i].verdict == c[i].verdict);
        CHECK(uc[i].eps_grid == c[i].eps_grid);
        CHECK(uc[i].t_grid == c[i].t_grid);
        CHECK(uc[i].witness.has_value() == c[i].witness.has_value());
        if (uc[i].witness) {
            CHECK(uc[i].witness->level == c[i].witness->level);
            CHECK(uc[i].witness->time_a == c[i].witness->time_a);
            CHECK(uc[i].witness->time_b == c[i].witness->time_b);
            CHECK(uc[i].witness->value == c[i].witness->value);
        }
    }
}

TEST_CASE("UC: equi-regular translates of a continuous path pass") {
    std::vector<CadlagPath> family;
    for (int k = 0; k < 4; ++k) {
        auto base = smooth_path();
        std::vector<Eigen::VectorXd> shifted;
        for (const auto& s : base.samples()) shifted.push_back(s + v1(0.5 * k));
        family.push_back(CadlagPath(base.grid(), shifted, {}));
    }
    ConditionOptions opts;
    opts.tolerance = 0.05;
    auto rep = check_UC(dyadic_sequence(1.0, 10), family, kTGrid, kEpsGrid, opts);
    CHECK(rep[0].verdict == Verdict::Pass);
    CHECK(rep[1].verdict == Verdict::Pass);
    CHECK(rep[2].verdict == Verdict::Pass);
}

TEST_CASE("UC1: family jumps at k/10 are isolated once mesh < 1/10") {
    std::vector<CadlagPath> family;
    for (int k = 1; k <= 3; ++k)
        family.push_back(CadlagPath::pure_jump(1.0, 1, {{k / 10.0, v1(1)}}));
    auto rep = check_UC(dyadic_sequence(1.0, 6), family, kTGrid, {0.5}, {});
    CHECK(rep[0].verdict == Verdict::Pass);
    CHECK_THROWS_AS(check_UC(dyadic_sequence(1.0, 6), {}, kTGrid, {0.5}, {}),
                    std::domain_error);
}
