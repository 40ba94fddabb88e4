#include <doctest.h>

#include "qv/partition.hpp"
#include "qv/path.hpp"

using namespace qv;

namespace {

Eigen::VectorXd v2(double a, double b) {
    Eigen::VectorXd v(2);
    v << a, b;
    return v;
}

Eigen::VectorXd v1(double a) {
    Eigen::VectorXd v(1);
    v << a;
    return v;
}

// X = 0 on [0,1[ with a jump (2,0) at t=1.
CadlagPath step_at_one() {
    return CadlagPath::pure_jump(1.0, 2, {{1.0, v2(2, 0)}});
}

// X_t = t*e1 on [0,1].
CadlagPath linear_e1() {
    return CadlagPath({0.0, 1.0}, {v2(0, 0), v2(1, 0)}, {});
}

CadlagPath step_half(double size = 2.0) {
    return CadlagPath::pure_jump(1.0, 1, {{0.5, v1(size)}});
}

}  // namespace

TEST_CASE("evaluation is right-continuous with exact jumps") {
    auto X = step_at_one();
    CHECK(X.value(1.0) == v2(2, 0));
    CHECK(X.value(0.999) == v2(0, 0));
    CHECK(linear_e1().value(0.5) == v2(0.5, 0));
    CHECK_THROWS_AS(X.value(1.5), std::domain_error);
}

TEST_CASE("left limits") {
    auto X = step_at_one();
    CHECK(X.left_limit(1.0) == v2(0, 0));
    auto L = linear_e1();
    CHECK(L.left_limit(0.25) == L.value(0.25));
    CadlagPath two = CadlagPath::pure_jump(1.0, 1, {{0.5, v1(1)}, {1.0, v1(3)}});
    CHECK(two.left_limit(1.0) == v1(1));  // only the 0.5 jump
    CHECK_THROWS_AS(two.left_limit(0.0), std::domain_error);
}

TEST_CASE("reconstruction: value = continuous part + jump prefix") {
    CadlagPath X({0.0, 0.3, 1.0}, {v1(0), v1(0.6), v1(1.4)},
                 {{0.25, v1(1)}, {0.7, v1(-2)}});
    for (double t : {0.0, 0.1, 0.25, 0.3, 0.5, 0.7, 0.99, 1.0}) {
        Eigen::VectorXd lhs = X.value(t);
        Eigen::VectorXd rhs = X.continuous_value(t) + X.jump_sum(t);
        CHECK((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
    }
}

TEST_CASE("jump set thresholds") {
    CadlagPath X = CadlagPath::pure_jump(1.0, 1, {{0.2, v1(0.3)}, {0.8, v1(1.2)}});
    CHECK(jump_set(X, 0.5).times == std::vector<double>{0.8});
    CHECK(jump_set(X, 0.0).times.size() == 2);
}

TEST_CASE("truncate_jumps splits exactly") {
    CadlagPath X({0.0, 1.0}, {v1(0), v1(0.5)}, {{0.2, v1(0.3)}, {0.8, v1(1.2)}});
    auto tr = truncate_jumps(X, 0.5);
    REQUIRE(tr.big_jumps.jumps().size() == 1);
    CHECK(tr.big_jumps.jumps()[0].time == 0.8);
    for (const auto& j : tr.residual.jumps()) CHECK(j.delta.norm() <= 0.5);
    for (double t : {0.0, 0.2, 0.5, 0.8, 1.0}) {
        Eigen::VectorXd sum = tr.big_jumps.value(t) + tr.residual.value(t);
        CHECK((sum - X.value(t)).norm() <= 1e-12);
    }
    auto all = truncate_jumps(X, 0.0);
    CHECK(all.big_jumps.jumps().size() == 2);
    CHECK(all.residual.jumps().empty());
    auto none = truncate_jumps(linear_e1(), 0.1);
    CHECK(none.big_jumps.jumps().empty());
}

TEST_CASE("oscillation on intervals") {
    CHECK(oscillation(linear_e1(), TimeInterval::closed(0, 1)) == doctest::Approx(1.0));
    auto S = step_half();
    CHECK(oscillation(S, TimeInterval::right_open(0, 0.5)) == 0.0);
    CHECK(oscillation(S, TimeInterval::closed(0, 0.5)) == doctest::Approx(2.0));
    CHECK(oscillation(S, TimeInterval{0.6, 0.4, true, true}) == 0.0);  // empty
}

TEST_CASE("oscillation is monotone in the interval") {
    CadlagPath X({0.0, 0.25, 0.5, 0.75, 1.0},
                 {v1(0), v1(1), v1(-0.5), v1(0.3), v1(0)}, {{0.6, v1(0.7)}});
    double inner = oscillation(X, TimeInterval::closed(0.2, 0.7));
    double outer = oscillation(X, TimeInterval::closed(0.0, 1.0));
    CHECK(inner <= outer + 1e-15);
}

TEST_CASE("osc_along: plus vs minus") {
    auto L = linear_e1();
    Partition pi = Partition::dyadic(1.0, 2);
    CHECK(osc_along(L, pi, 1.0, Side::Plus) ==
          doctest::Approx(osc_along(L, pi, 1.0, Side::Minus)));

    // Jump interior to an interval counts on both sides.
    auto S = CadlagPath::pure_jump(1.0, 1, {{0.3, v1(2)}});
    CHECK(osc_along(S, Partition::dyadic(1.0, 1), 1.0, Side::Plus) >= 2.0);
    CHECK(osc_along(S, Partition::dyadic(1.0, 1), 1.0, Side::Minus) >= 2.0);

    // Jump at a partition point: [r,s[ excludes it.
    auto S2 = step_half();
    CHECK(osc_along(S2, Partition::dyadic(1.0, 1), 1.0, Side::Minus) == 0.0);
    CHECK(osc_along(S2, Partition::dyadic(1.0, 1), 1.0, Side::Plus) == doctest::Approx(2.0));
}

TEST_CASE("O- <= O+ always") {
    CadlagPath X({0.0, 0.2, 0.4, 0.6, 0.8, 1.0},
                 {v1(0), v1(0.4), v1(-0.1), v1(0.9), v1(0.2), v1(0.5)},
                 {{0.25, v1(1)}, {0.6, v1(-0.8)}});
    for (int lvl : {0, 1, 2, 3})
        for (double t : {0.3, 0.6, 1.0}) {
            Partition pi = Partition::dyadic(1.0, lvl);
            CHECK(osc_along(X, pi, t, Side::Minus) <= osc_along(X, pi, t, Side::Plus) + 1e-15);
        }
}

TEST_CASE("total variation, exact for the representation") {
    CHECK(total_variation(linear_e1(), 0.0, 1.0) == doctest::Approx(1.0));
    CHECK(total_variation(step_half(), 0.0, 1.0) == doctest::Approx(2.0));
    // Sawtooth with 4 unit legs.
    CadlagPath saw({0.0, 0.25, 0.5, 0.75, 1.0}, {v1(0), v1(1), v1(0), v1(1), v1(0)}, {});
    CHECK(total_variation(saw, 0.0, 1.0) == doctest::Approx(4.0));
}

TEST_CASE("total variation is additive over concatenation at grid points") {
    CadlagPath X({0.0, 0.25, 0.5, 0.75, 1.0},
                 {v1(0), v1(1), v1(0.2), v1(0.9), v1(0.4)}, {{0.6, v1(2)}});
    double whole = total_variation(X, 0.0, 1.0);
    double split = total_variation(X, 0.0, 0.5) + total_variation(X, 0.5, 1.0);
    CHECK(whole == doctest::Approx(split).epsilon(1e-12));
}

TEST_CASE("family variation") {
    CadlagPath a({0.0, 1.0}, {v1(0), v1(1)}, {});
    CadlagPath b({0.0, 1.0}, {v1(0), v1(2)}, {});
    CHECK(family_variation({a, b}, 0.0, 1.0) == doctest::Approx(2.0));
    CHECK(family_variation({a}, 0.0, 1.0) == doctest::Approx(total_variation(a, 0.0, 1.0)));
    std::vector<CadlagPath> steps;
    for (int k = 1; k <= 4; ++k)
        steps.push_back(CadlagPath::pure_jump(1.0, 1, {{0.5, v1(k)}}));
    CHECK(family_variation(steps, 0.0, 1.0) == doctest::Approx(4.0));
    CHECK_THROWS_AS(family_variation({}, 0.0, 1.0), std::domain_error);
}

TEST_CASE("norm choices") {
    Eigen::VectorXd v = v2(3, -4);
    CHECK(vector_norm(v, Norm::Euclidean) == doctest::Approx(5.0));
    CHECK(vector_norm(v, Norm::L1) == doctest::Approx(7.0));
    CHECK(vector_norm(v, Norm::LInf) == doctest::Approx(4.0));
    CHECK(vector_norm(Eigen::VectorXd::Zero(2), Norm::L1) == 0.0);
}
