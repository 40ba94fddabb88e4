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

}  // namespace

TEST_CASE("counter RNG is the documented splitmix64 stream") {
    // First output of splitmix64 for state 0 -- a published reference value.
    CHECK(rng_at(0, 0) == 0xE220A8397B1DCDAFull);
    CHECK(rng_at(0, 1) == rng_at(0x9E3779B97F4A7C15ull, 0));  // counter = state shift
    for (uint64_t i = 0; i < 100; ++i) {
        double u = uniform01(42, i);
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        CHECK(std::isfinite(gaussian(42, i)));
    }
}

TEST_CASE("generation is deterministic and bit-exact") {
    PathRecipe r;
    r.kind = RecipeKind::ScaledRandomWalk;
    r.seed = 123;
    r.level = 9;
    r.dim = 2;
    auto a = generate(r);
    auto b = generate(r);
    REQUIRE(a.grid() == b.grid());
    for (size_t i = 0; i < a.samples().size(); ++i)
        CHECK(a.samples()[i] == b.samples()[i]);

    r.kind = RecipeKind::FBM;
    r.hurst = 0.8;
    r.level = 8;
    auto f1 = generate(r);
    auto f2 = generate(r);
    for (size_t i = 0; i < f1.samples().size(); ++i)
        CHECK(f1.samples()[i] == f2.samples()[i]);
}

TEST_CASE("scaled walk: matched-grid scalar QV is exactly T") {
    PathRecipe r;
    r.kind = RecipeKind::ScaledRandomWalk;
    r.seed = 5;
    r.level = 8;
    r.dim = 1;
    auto X = generate(r);
    double q = discrete_scalar_qv(X, Partition::dyadic(1.0, 8), 1.0);
    CHECK(q == doctest::Approx(1.0).epsilon(1e-12));
    // Each increment has magnitude sqrt(mesh) exactly.
    CHECK(holder_quotient(X, 0.5) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("scaled walk: matched-grid tensor QV is T * sigma sigma^T") {
    PathRecipe r;
    r.kind = RecipeKind::ScaledRandomWalk;
    r.seed = 11;
    r.level = 8;
    r.dim = 2;
    r.sigma = Eigen::MatrixXd(2, 2);
    r.sigma << 1, 0, 1, 1;
    auto X = generate(r);
    Eigen::MatrixXd want = r.sigma * r.sigma.transpose();

    for (double t : {0.5, 1.0}) {
        Eigen::VectorXd got = discrete_qv(BilinearForm::outer(2), X, X, Partition::dyadic(1.0, 8), t);
        Eigen::MatrixXd G = unflatten(got, 2, 2);
        CHECK((G - t * want).norm() <= 1e-12 * (1.0 + want.norm()));
    }
    auto e = expected_qv(r);
    REQUIRE(e.has_value());
    CHECK((e->linear_rate - want).norm() <= 1e-15);
    CHECK(e->scalar_at(1.0) == doctest::Approx(want.trace()));
}

TEST_CASE("step recipe reproduces the canonical step path") {
    PathRecipe r;
    r.kind = RecipeKind::StepFV;
    r.dim = 2;
    r.jumps = {{1.0, v2(2, 0)}};
    auto X = generate(r);
    CHECK(X.value(1.0) == v2(2, 0));
    CHECK(X.value(0.999) == v2(0, 0));
    auto e = expected_qv(r);
    REQUIRE(e.has_value());
    CHECK(e->tensor_at(0.999).norm() == 0.0);
    Eigen::MatrixXd M = e->tensor_at(1.0);
    CHECK(M(0, 0) == doctest::Approx(4.0));
    CHECK(M(0, 1) == 0.0);
    CHECK(M(1, 1) == 0.0);
}

TEST_CASE("jump-diffusion recipe carries both parts") {
    PathRecipe r;
    r.kind = RecipeKind::JumpDiffusion;
    r.seed = 3;
    r.level = 6;
    r.dim = 1;
    r.jumps = {{0.75, v1(1)}, {0.25, v1(-2)}};
    auto X = generate(r);
    REQUIRE(X.jumps().size() == 2);
    CHECK(X.jumps()[0].time == 0.25);  // sorted
    auto e = expected_qv(r);
    REQUIRE(e.has_value());
    CHECK(e->scalar_at(1.0) == doctest::Approx(1.0 + 4.0 + 1.0));  // T + sum dX^2
    CHECK(e->scalar_at(0.5) == doctest::Approx(0.5 + 4.0));
}

TEST_CASE("smooth recipe evaluates the polynomial and has zero expected QV") {
    PathRecipe r;
    r.kind = RecipeKind::SmoothFV;
    r.dim = 2;
    r.level = 8;
    r.poly = {{0.0, 0.0, 1.0}};  // t^2 in coordinate 0; coordinate 1 defaults to t
    auto X = generate(r);
    CHECK(X.value(0.5)[0] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(X.value(0.5)[1] == doctest::Approx(0.5).epsilon(1e-12));
    auto e = expected_qv(r);
    REQUIRE(e.has_value());
    CHECK(e->tensor_at(1.0).norm() == 0.0);
    // Discrete scalar QV dies at rate mesh along dyadic refinement.
    double q4 = discrete_scalar_qv(X, Partition::dyadic(1.0, 4), 1.0);
    double q8 = discrete_scalar_qv(X, Partition::dyadic(1.0, 8), 1.0);
    CHECK(q8 < q4);
    CHECK(q8 <= 1e-2);
}

TEST_CASE("fractional path with H = 0.8: discrete QV decreases toward zero") {
    PathRecipe r;
    r.kind = RecipeKind::FBM;
    r.seed = 77;
    r.hurst = 0.8;
    r.level = 12;
    r.dim = 1;
    auto X = generate(r);
    double prev = std::numeric_limits<double>::infinity();
    for (int n = 4; n <= 10; n += 2) {
        double q = discrete_scalar_qv(X, Partition::dyadic(1.0, n), 1.0);
        CHECK(q < prev);
        prev = q;
    }
    CHECK(prev < 0.1);
    auto e = expected_qv(r);
    REQUIRE(e.has_value());
    CHECK(e->linear_rate.norm() == 0.0);

    r.hurst = 0.3;  // no closed form registered below 1/2
    CHECK(!expected_qv(r).has_value());
}

TEST_CASE("recipe validation") {
    PathRecipe r;
    r.kind = RecipeKind::FBM;
    r.hurst = 1.5;
    CHECK_THROWS_AS(generate(r), std::invalid_argument);

    PathRecipe s;
    s.kind = RecipeKind::StepFV;
    s.dim = 1;
    s.jumps = {{0.0, v1(1)}};
    CHECK_THROWS_AS(generate(s), std::invalid_argument);  // jump at t = 0
    s.jumps = {{0.5, v2(1, 1)}};
    CHECK_THROWS_AS(generate(s), std::invalid_argument);  // dimension mismatch
    s.jumps.clear();
    s.dim = 0;
    CHECK_THROWS_AS(generate(s), std::invalid_argument);
}
