#include "doctest.h"

#include "latsel/inner.hpp"
#include "latsel/models.hpp"
#include "oracles.hpp"

using namespace latsel;

TEST_CASE("restricted QP examples") {
    QuadraticSpec f(Eigen::Matrix2d::Identity(), Eigen::Vector2d(-2, -4), 1.5);
    auto s = solve_restricted_qp(f, Subset::full(2));
    CHECK(s.x.isApprox(Eigen::Vector2d(1, 2)));
    CHECK(s.value == doctest::Approx(-5.0 + 1.5));

    auto e = solve_restricted_qp(f, Subset(2));
    CHECK(e.x.isZero());
    CHECK(e.value == 1.5);

    QuadraticSpec g(Eigen::Matrix2d::Identity(), Eigen::Vector2d(2, -2));
    auto t = solve_restricted_qp(g, Subset::full(2));
    CHECK(t.x[0] == doctest::Approx(0.0));
    CHECK(t.x[1] == doctest::Approx(1.0));
    CHECK(t.value == doctest::Approx(-1.0));

    CHECK_THROWS_AS(solve_restricted_qp(f, Subset::full(2), 0.0), InvalidArgument);
    CHECK_THROWS_AS(solve_restricted_qp(f, Subset::full(3)), InvalidArgument);
}

TEST_CASE("indefinite restriction names coordinates") {
    Eigen::Matrix3d q;
    q << 1, -2, 0, -2, 1, 0, 0, 0, 1;
    QuadraticSpec f(q, Eigen::Vector3d(-1, -1, -1), 0.0, SignMode::free);
    try {
        solve_restricted_qp(f, Subset::full(3));
        FAIL("expected IndefiniteError");
    } catch (const IndefiniteError& e) {
        CHECK(e.coordinates == std::vector<std::size_t>{0, 1});
    }
    // Restrictions avoiding the negative direction are fine.
    CHECK_NOTHROW(solve_restricted_qp(f, Subset::from_indices(3, {0, 2})));
}

TEST_CASE("nonnegative mode requires nonpositive off-diagonals") {
    Eigen::Matrix2d q;
    q << 1, 0.5, 0.5, 1;
    CHECK_THROWS_AS(QuadraticSpec(q, Eigen::Vector2d(-1, -1)), InvalidArgument);
    CHECK_NOTHROW(QuadraticSpec(q, Eigen::Vector2d(-1, -1), 0.0, SignMode::nonnegative, true));
    CHECK_NOTHROW(QuadraticSpec(q, Eigen::Vector2d(-1, -1), 0.0, SignMode::free));
}

TEST_CASE("restricted QP matches support enumeration") {
    std::mt19937_64 rng(11);
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
        auto inst = gen_regression_instance(6, seed, 0.05);
        const auto& f = inst.fspec;
        for (int t = 0; t < 8; ++t) {
            const std::uint64_t mask = rng() & 63u;
            auto s = solve_restricted_qp(f, Subset::from_mask(6, mask));
            const double want = oracle::restricted_qp(f.q(), f.p(), f.offset(), mask);
            CHECK(s.value == doctest::Approx(want).epsilon(1e-9));
            CHECK((s.x.array() >= 0.0).all());
            CHECK(support_of(s.x).is_subset_of(Subset::from_mask(6, mask)));
        }
    }
}

TEST_CASE("free-sign mode solves the linear system") {
    auto inst = gen_denoising_instance(5, 2, 0.8, 0.05);
    const auto& f = inst.fspec;
    auto s = solve_restricted_qp(f, Subset::full(5));
    const double want = oracle::restricted_qp(f.q(), f.p(), f.offset(), 31u, false);
    CHECK(s.value == doctest::Approx(want).epsilon(1e-10));
}

TEST_CASE("composite values with warm starts equal cold solves") {
    auto inst = gen_regression_instance(7, 4, 0.05, PenaltyKind::interval);
    CompositeFunction comp(inst.fspec, inst.g);
    for (std::uint64_t m = 0; m < 128; ++m) {
        auto a = Subset::from_mask(7, m);
        const double cold = solve_restricted_qp(inst.fspec, a).value + inst.g(a);
        CHECK(comp(a) == doctest::Approx(cold).epsilon(1e-10));
    }
    CHECK(comp.qp_solves() == 128);
    comp(Subset::full(7));
    CHECK(comp.qp_solves() == 128);
}

TEST_CASE("composite is submodular on regression instances") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto inst = gen_regression_instance(5, seed, 0.05);
        CompositeFunction comp(inst.fspec, inst.g);
        CHECK(oracle::is_submodular(5, [&](std::uint64_t m) { return comp(Subset::from_mask(5, m)); }, 1e-8));
        CHECK(check_submodular_bruteforce(comp.as_set_function()));
    }
}

TEST_CASE("eval_H and recover_primal") {
    QuadraticSpec f(Eigen::Matrix2d::Identity(), Eigen::Vector2d(-2, -4), 5.0);
    CompositeFunction comp(f, cardinality_penalty_g(2, 1.0));
    CHECK(comp.eval_H(Subset(2)) == 5.0);
    CHECK(recover_primal(comp, Subset(2)).x.isZero());
    auto x = recover_primal(comp, Subset::from_indices(2, {1}));
    CHECK(x.x.isApprox(Eigen::Vector2d(0, 2)));
    CHECK(combined_objective(comp, x.x) == doctest::Approx(2.0));
    CHECK_THROWS_AS(CompositeFunction(f, cardinality_penalty_g(3, 1.0)), InvalidArgument);
}
