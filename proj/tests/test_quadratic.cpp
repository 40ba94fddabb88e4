#include <doctest.h>

#include <cmath>

#include "qv/generators.hpp"
#include "qv/quadratic.hpp"

using namespace qv;

namespace {

Eigen::VectorXd v1(double a) {
    Eigen::VectorXd v(1);
    v << a;
    return v;
}

Eigen::VectorXd v2(double a, double b) {
    Eigen::VectorXd v(2);
    v << a, b;
    return v;
}

CadlagPath step12() {  // single jump (1,2) at t = 0.3
    return CadlagPath::pure_jump(1.0, 2, {{0.3, v2(1, 2)}});
}

CadlagPath linear_e1() {
    return CadlagPath({0.0, 1.0}, {v2(0, 0), v2(1, 0)}, {});
}

CadlagPath walk(uint64_t seed, int level, int dim = 1) {
    PathRecipe r;
    r.kind = RecipeKind::ScaledRandomWalk;
    r.seed = seed;
    r.level = level;
    r.dim = dim;
    return generate(r);
}

}  // namespace

TEST_CASE("discrete_qv basic values") {
    // Jump (1,2) alone in an interval: outer value is the rank-one matrix.
    auto q = discrete_qv(BilinearForm::outer(2), step12(), step12(), Partition::dyadic(1.0, 1),
                         1.0);
    CHECK(q[0] == doctest::Approx(1));
    CHECK(q[1] == doctest::Approx(2));
    CHECK(q[2] == doctest::Approx(2));
    CHECK(q[3] == doctest::Approx(4));

    for (int n : {2, 5, 9}) {
        auto s = discrete_qv(BilinearForm::inner(2), linear_e1(), linear_e1(),
                             Partition::dyadic(1.0, n), 1.0);
        CHECK(s[0] == doctest::Approx(std::ldexp(1.0, -n)).epsilon(1e-12));
    }
    CHECK(discrete_qv(BilinearForm::inner(2), step12(), step12(), Partition::dyadic(1.0, 4),
                      0.0)[0] == 0.0);
}

TEST_CASE("scalar qv norms and trace identity") {
    CadlagPath J = CadlagPath::pure_jump(1.0, 2, {{0.4, v2(3, 4)}});
    Partition pi = Partition::dyadic(1.0, 3);
    CHECK(discrete_scalar_qv(J, pi, 1.0, Norm::LInf) == doctest::Approx(16.0));
    CHECK(discrete_scalar_qv(J, pi, 1.0, Norm::Euclidean) == doctest::Approx(25.0));
    CHECK(discrete_scalar_qv(J, pi, 0.0) == 0.0);

    auto W = walk(11, 6, 2);
    for (double t : {0.3, 0.7, 1.0}) {
        Eigen::VectorXd tensor = discrete_qv(BilinearForm::outer(2), W, W, pi, t);
        double tr = tensor[0] + tensor[3];
        double sc = discrete_scalar_qv(W, pi, t);
        CHECK(std::abs(tr - sc) <= 1e-12 * (1.0 + std::abs(sc)));
    }
}

TEST_CASE("two_variation is the sup over levels") {
    auto seq = dyadic_sequence(1.0, 8);
    CHECK(two_variation(linear_e1(), seq, 1.0) == doctest::Approx(1.0));  // level 0
    CadlagPath J = CadlagPath::pure_jump(1.0, 1, {{0.3, v1(2)}, {0.8, v1(1)}});
    CHECK(two_variation(J, seq, 1.0) >= 5.0 - 1e-12);
    CHECK(two_variation(CadlagPath::constant(1.0, v1(4)), seq, 1.0) == 0.0);
}

TEST_CASE("polarization identity, exact per level") {
    auto X = walk(3, 7), Y = walk(4, 7);
    for (int n : {2, 4, 7}) {
        Partition pi = Partition::dyadic(1.0, n);
        for (double t : {0.25, 0.6, 1.0}) {
            auto B = BilinearForm::inner(1);
            // build X+Y and X-Y on the common grid
            std::vector<Eigen::VectorXd> sp, sm;
            for (size_t i = 0; i < X.grid().size(); ++i) {
                sp.push_back(X.samples()[i] + Y.samples()[i]);
                sm.push_back(X.samples()[i] - Y.samples()[i]);
            }
            CadlagPath XpY(X.grid(), sp, {}), XmY(X.grid(), sm, {});
            double lhs = discrete_qv(B, XpY, XpY, pi, t)[0] + discrete_qv(B, XmY, XmY, pi, t)[0];
            double rhs =
                2.0 * discrete_qv(B, X, X, pi, t)[0] + 2.0 * discrete_qv(B, Y, Y, pi, t)[0];
            CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + std::abs(rhs)));
        }
    }
}

TEST_CASE("symmetry and additivity in the form") {
    auto X = walk(5, 5, 2), Y = walk(6, 5, 2);
    Partition pi = Partition::dyadic(1.0, 5);
    Eigen::MatrixXd S(2, 2);
    S << 2, 1, 1, -3;  // symmetric
    auto B = BilinearForm::coefficients({S});
    CHECK((discrete_qv(B, X, Y, pi, 1.0) - discrete_qv(B, Y, X, pi, 1.0)).norm() == 0.0);

    Eigen::MatrixXd C1(2, 2), C2(2, 2);
    C1 << 1, 0, 2, 1;
    C2 << 0, 1, 1, 0;
    auto Ba = BilinearForm::coefficients({C1});
    auto Bb = BilinearForm::coefficients({C2});
    auto Bsum = BilinearForm::coefficients({C1 + C2});
    Eigen::VectorXd sum = discrete_qv(Ba, X, Y, pi, 1.0) + discrete_qv(Bb, X, Y, pi, 1.0);
    CHECK((discrete_qv(Bsum, X, Y, pi, 1.0) - sum).norm() <= 1e-12 * (1.0 + sum.norm()));
}

TEST_CASE("continuity in B at the discrete level") {
    auto X = walk(8, 6, 2);
    Partition pi = Partition::dyadic(1.0, 6);
    Eigen::MatrixXd C(2, 2), Cp(2, 2);
    C << 1, 0.5, -0.2, 1;
    Cp = C + 0.01 * Eigen::MatrixXd::Ones(2, 2);
    auto B = BilinearForm::coefficients({C});
    auto Bp = BilinearForm::coefficients({Cp});
    double diff =
        (discrete_qv(B, X, X, pi, 1.0) - discrete_qv(Bp, X, X, pi, 1.0)).norm();
    // || B - B' || <= frobenius of the coefficient difference
    double bound_norm = (C - Cp).norm();
    double cross = 0.0;
    for (size_t i = 0; i + 1 < pi.points.size(); ++i) {
        double inc = (X.value(pi.points[i + 1]) - X.value(pi.points[i])).norm();
        cross += inc * inc;
    }
    CHECK(diff <= bound_norm * cross + 1e-12);
}

TEST_CASE("qv_limit on FV paths: limit is the jump sum, jumps are structural") {
    CadlagPath J = CadlagPath::pure_jump(1.0, 2, {{0.3, v2(1, 2)}, {0.7, v2(-1, 0)}});
    auto seq = dyadic_range(1.0, 4, 14);
    QVLimitOptions opts;
    opts.tolerance = 1e-9;
    auto res = qv_limit(BilinearForm::inner(2), J, J, seq, {0.5, 1.0}, opts);
    CHECK(res.estimate.verdict == Verdict::Pass);
    CHECK(res.estimate.limit[0][0] == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(res.estimate.limit[1][0] == doctest::Approx(6.0).epsilon(1e-12));
    REQUIRE(res.qv.path.jumps().size() == 2);
    // Def-by-construction: QV jump = B(dX, dX) bit-exactly.
    CHECK(res.qv.path.jumps()[0].delta[0] == 5.0);
    CHECK(res.qv.path.jumps()[1].delta[0] == 1.0);
    // Scalar QV path is nondecreasing.
    double prev = 0.0;
    for (double t : {0.1, 0.3, 0.5, 0.7, 0.9, 1.0}) {
        double cur = res.qv.path.value(t)[0];
        CHECK(cur >= prev - 1e-12);
        prev = cur;
    }
}

TEST_CASE("split_continuous_jump reconstructs") {
    CadlagPath J = CadlagPath::pure_jump(1.0, 1, {{0.5, v1(2)}});
    auto seq = dyadic_range(1.0, 4, 12);
    auto res = qv_limit(BilinearForm::inner(1), J, J, seq, {0.25, 0.5, 0.75, 1.0}, {});
    auto [cont, jumps] = split_continuous_jump(res.qv);
    CHECK(cont.jumps().empty());
    for (double t : {0.25, 0.5, 1.0})
        CHECK((cont.value(t) + jumps.value(t) - res.qv.path.value(t)).norm() <= 1e-12);
    // pure-jump QV: continuous part vanishes
    CHECK(cont.value(1.0).norm() <= 1e-9);
}

TEST_CASE("push_linear: identity, entries, variation bound") {
    auto W = walk(21, 10, 2);
    auto seq = dyadic_range(1.0, 4, 10);
    auto res = qv_limit(BilinearForm::outer(2), W, W, seq, {0.5, 1.0}, {});
    auto same = push_linear(Eigen::MatrixXd::Identity(4, 4), res.qv);
    for (double t : {0.5, 1.0})
        CHECK((same.path.value(t) - res.qv.path.value(t)).norm() == 0.0);
    Eigen::MatrixXd e12 = Eigen::MatrixXd::Zero(1, 4);
    e12(0, 1) = 1.0;  // the (1,2) entry of the flattened matrix
    auto entry = push_linear(e12, res.qv);
    CHECK(entry.out_dim == 1);
    CHECK(entry.path.value(1.0)[0] == doctest::Approx(res.qv.path.value(1.0)[1]));
}

TEST_CASE("push_pair: projections and rotations, exact per level") {
    auto W = walk(31, 8, 2);
    auto seq = dyadic_range(1.0, 4, 8);
    std::vector<double> times{0.5, 1.0};

    // identity tautology
    Eigen::MatrixXd I = Eigen::MatrixXd::Identity(2, 2);
    auto taut = push_pair(I, I, W, W, BilinearForm::inner(2), seq, times, {});
    CHECK(taut.max_level_discrepancy <= 1e-12);

    // coordinate projection: QV of the first coordinate
    Eigen::MatrixXd P(1, 2);
    P << 1, 0;
    auto proj = push_pair(P, P, W, W, BilinearForm::inner(1), seq, times, {});
    CHECK(proj.max_level_discrepancy <= 1e-12);

    // rotation invariance of the Euclidean scalar QV
    double c = std::cos(0.7), s = std::sin(0.7);
    Eigen::MatrixXd R(2, 2);
    R << c, -s, s, c;
    auto rot = push_pair(R, R, W, W, BilinearForm::inner(2), seq, times, {});
    CHECK(rot.max_level_discrepancy <= 1e-12);
    auto plain = qv_limit(BilinearForm::inner(2), W, W, seq, times, {});
    for (size_t n = 0; n < seq.size(); ++n)
        for (size_t k = 0; k < times.size(); ++k)
            CHECK(std::abs(rot.transformed.estimate.values[n][k][0] -
                           plain.estimate.values[n][k][0]) <=
                  1e-12 * (1.0 + std::abs(plain.estimate.values[n][k][0])));
}

TEST_CASE("cylindrical and trace views") {
    CadlagPath J = CadlagPath::pure_jump(1.0, 2, {{0.5, v2(1, 2)}});
    auto seq = dyadic_range(1.0, 4, 10);
    auto res = qv_limit(BilinearForm::outer(2), J, J, seq, {0.5, 1.0}, {});

    auto c12 = cylindrical_qv(v2(1, 0), v2(0, 1), res.qv);
    CHECK(c12.path.value(1.0)[0] == doctest::Approx(2.0));  // (1,2) entry of vv^T
    auto c11 = cylindrical_qv(v2(1, 0), v2(1, 0), res.qv);
    CHECK(c11.path.value(1.0)[0] == doctest::Approx(1.0));
    auto mixed = cylindrical_qv(v2(1, 1), v2(1, -1), res.qv);
    CHECK(mixed.path.value(1.0)[0] == doctest::Approx(-3.0));  // (1+2)(1-2)

    auto tr = trace_qv(res.qv);
    CHECK(tr.path.value(1.0)[0] == doctest::Approx(5.0));
    CHECK(trace_qv(qv_limit(BilinearForm::outer(1), CadlagPath::constant(1.0, v1(0)),
                            CadlagPath::constant(1.0, v1(0)), seq, {1.0}, {})
                       .qv)
              .path.value(1.0)[0] == 0.0);
}

TEST_CASE("restarted sums") {
    auto W = walk(41, 14);
    Partition pi = Partition::dyadic(1.0, 8);
    auto B = BilinearForm::inner(1);
    CHECK((restarted_qv(B, W, pi, 0.0, 0.7) - discrete_qv(B, W, W, pi, 0.7)).norm() == 0.0);
    CHECK(restarted_qv(B, W, pi, 0.4, 0.4).norm() == 0.0);
    CadlagPath J = CadlagPath::pure_jump(1.0, 1, {{0.5, v1(3)}});
    CHECK(restarted_qv(B, J, pi, 0.6, 1.0).norm() == 0.0);
    CHECK_THROWS_AS(restarted_qv(B, W, pi, 0.9, 0.1), std::domain_error);

    // Convergence harness: restarted sum approaches Q(t) - Q(s).
    auto seq = dyadic_range(1.0, 6, 10);
    auto lim = qv_limit(B, W, W, seq, {0.25, 0.75}, {});
    double target = lim.estimate.limit[1][0] - lim.estimate.limit[0][0];
    double fine = restarted_qv(B, W, seq.levels.back(), 0.25, 0.75)[0];
    CHECK(fine == doctest::Approx(target).epsilon(1e-6));
}

TEST_CASE("absolute continuity bound") {
    CadlagPath J = CadlagPath::pure_jump(1.0, 2, {{0.3, v2(1, 2)}, {0.8, v2(0, -1)}});
    auto seq = dyadic_range(1.0, 4, 12);
    std::vector<double> times{0.25, 0.5, 0.75, 1.0};
    auto qv_B = qv_limit(BilinearForm::outer(2), J, J, seq, times, {});
    auto qv_s = qv_limit(BilinearForm::inner(2), J, J, seq, times, {});
    auto rep = abs_continuity_check(qv_B.qv, qv_s.qv, 1.0, Crossnorm::Projective,
                                    {{0.0, 0.5}, {0.25, 0.75}, {0.5, 1.0}, {0.0, 1.0}});
    CHECK(rep.max_violation == 0.0);
    // Pure-jump + nuclear norm: the bound is an equality interval-by-interval.
    CHECK(rep.rows[3].lhs == doctest::Approx(rep.rows[3].rhs).epsilon(1e-9));
}

TEST_CASE("density on a pure-jump path isolates the jumps") {
    CadlagPath J = CadlagPath::pure_jump(1.0, 2, {{0.3, v2(1, 2)}, {0.8, v2(2, 0)}});
    auto seq = dyadic_range(1.0, 4, 12);
    std::vector<double> times;
    for (int i = 1; i <= 10; ++i) times.push_back(i / 10.0);
    auto qv_B = qv_limit(BilinearForm::outer(2), J, J, seq, times, {});
    auto qv_s = qv_limit(BilinearForm::inner(2), J, J, seq, times, {});
    auto dens = density_estimate(qv_B.qv, qv_s.qv, Partition::uniform(1.0, 10), 1e-8,
                                 Crossnorm::Projective, 1.0);
    // Cell ]0.2,0.3] holds the first jump: q = vv^T / |v|^2, nuclear norm 1.
    const auto& cell = dens.cells[2];
    REQUIRE(cell.has_mass);
    CHECK(cell.q[0] == doctest::Approx(1.0 / 5.0));
    CHECK(cell.q[1] == doctest::Approx(2.0 / 5.0));
    CHECK(cell.q[3] == doctest::Approx(4.0 / 5.0));
    CHECK(cell.q_norm == doctest::Approx(1.0));
    CHECK(dens.max_norm_excess <= 1e-9);
    CHECK(dens.reconstruction_error <= 1e-9);

    auto unit = unit_density_check(dens, qv_B.qv, qv_s.qv, times);
    CHECK(unit.max_deviation <= 1e-9);
    CHECK(unit.variation_gap <= 1e-9);

    CHECK_THROWS_AS(density_estimate(qv_B.qv, qv_s.qv, Partition::uniform(1.0, 10), 100.0,
                                     Crossnorm::Projective, 1.0),
                    std::runtime_error);
}

TEST_CASE("crossnorm sandwich and rank-one agreement") {
    Eigen::MatrixXd M(2, 2);
    M << 1, 2, -0.5, 0.3;
    double inj = matrix_crossnorm(M, Crossnorm::Injective);
    double hil = matrix_crossnorm(M, Crossnorm::Hilbertian);
    double proj = matrix_crossnorm(M, Crossnorm::Projective);
    CHECK(inj <= hil + 1e-12);
    CHECK(hil <= proj + 1e-12);
    Eigen::VectorXd v = v2(3, -4), w = v2(1, 2);
    Eigen::MatrixXd R = v * w.transpose();
    for (auto a : {Crossnorm::Injective, Crossnorm::Hilbertian, Crossnorm::Projective})
        CHECK(matrix_crossnorm(R, a) == doctest::Approx(v.norm() * w.norm()));
}
