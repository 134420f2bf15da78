#include "doctest.h"

#include "latsel/baselines.hpp"
#include "latsel/models.hpp"
#include "oracles.hpp"

using namespace latsel;

TEST_CASE("PGD examples") {
    auto m = pgd_lovasz_minimize(modular_function(Eigen::Vector3d(-1, 2, -3)));
    CHECK(m.result.minimizer == Subset::from_indices(3, {0, 2}));
    CHECK(m.result.value == doctest::Approx(-4.0));

    QuadraticSpec f(Eigen::Matrix2d::Identity(), Eigen::Vector2d(-2, -4), 5.0);
    CompositeFunction comp(f, cardinality_penalty_g(2, 1.0));
    auto r = pgd_lovasz_minimize(comp);
    CHECK(r.result.minimizer == Subset::from_indices(2, {1}));
    CHECK(r.result.value == doctest::Approx(2.0));

    PgdOptions bad;
    bad.max_iter = 0;
    CHECK_THROWS_AS(pgd_lovasz_minimize(comp, bad), InvalidArgument);
}

TEST_CASE("PGD agrees with enumeration on small composites") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto inst = gen_regression_instance(8, seed, 0.05);
        CompositeFunction comp(inst.fspec, inst.g);
        auto want = oracle::minimize(8, [&](std::uint64_t m) { return comp(Subset::from_mask(8, m)); });
        PgdOptions o;
        o.max_iter = 2000;
        auto r = pgd_lovasz_minimize(comp, o);
        CHECK(r.result.value == doctest::Approx(want.value).epsilon(1e-9));
        CHECK(r.result.gap_certificate >= -1e-12);
        REQUIRE(!r.trace.empty());
        for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i].objective <= r.trace[i - 1].objective);
    }
}

TEST_CASE("discretized FW recovers a grid node") {
    // f(x) = Σ (x_i - c_i)^2 with c on the grid 0, 0.1, ..., 1.
    Eigen::Vector3d c(0.3, 0.0, 0.8);
    QuadraticSpec f(Eigen::Matrix3d::Identity(), -2.0 * c, c.squaredNorm());
    auto grid = DiscretizationGrid::uniform(3, 11, 0.0, 1.0);
    auto r = discretized_fw_minimize(f, zero_function(3), grid);
    CHECK(r.x.isApprox(c, 1e-12));
    CHECK(r.value == doctest::Approx(0.0).scale(1.0));
    CHECK(r.level == std::vector<std::size_t>{3, 0, 8});
}

TEST_CASE("discretized FW on a constant function") {
    QuadraticSpec f(Eigen::Matrix2d::Zero(), Eigen::Vector2d::Zero(), 0.0, SignMode::nonnegative);
    auto r = discretized_fw_minimize(f, zero_function(2), DiscretizationGrid::uniform(2, 5, 0.0, 1.0));
    CHECK(r.value == 0.0);
    CHECK(r.gap_certificate == doctest::Approx(0.0));
}

TEST_CASE("discretized FW matches grid enumeration") {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        auto inst = gen_regression_instance(4, seed, 0.05);
        const std::size_t k = 6;
        auto grid = DiscretizationGrid::uniform(4, k, 0.0, 1.0);
        FwOptions o;
        o.max_iter = 2000;
        o.tol = 1e-10;
        auto r = discretized_fw_minimize(inst.fspec, inst.g, grid, o);
        double best = HUGE_VAL;
        for (std::size_t code = 0; code < k * k * k * k; ++code) {
            Eigen::VectorXd x(4);
            std::size_t c = code;
            for (int i = 0; i < 4; ++i, c /= k) x[i] = grid.value(static_cast<std::size_t>(i), c % k);
            best = std::min(best, inst.fspec.value(x) + inst.g(support_of(x)));
        }
        CHECK(r.value == doctest::Approx(best).epsilon(1e-9));
        CHECK(r.gap_certificate >= -1e-12);
    }
}

TEST_CASE("discretized FW refuses oversized grids") {
    auto inst = gen_regression_instance(4, 0, 0.05);
    FwOptions o;
    o.max_cells = 10;
    CHECK_THROWS_AS(discretized_fw_minimize(inst.fspec, inst.g, DiscretizationGrid::uniform(4, 5, 0, 1), o),
                    InvalidArgument);
    CHECK_THROWS_AS(DiscretizationGrid::uniform(4, 1, 0, 1).validate(4), InvalidArgument);
}
