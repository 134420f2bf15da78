#include "doctest.h"

#include "latsel/inner.hpp"
#include "latsel/models.hpp"
#include "latsel/sfm.hpp"
#include "oracles.hpp"

using namespace latsel;

namespace {

CompositeFunction two_point_composite() {
    QuadraticSpec f(Eigen::Matrix2d::Identity(), Eigen::Vector2d(-2, -4), 5.0);
    return CompositeFunction(f, cardinality_penalty_g(2, 1.0));
}

SetFunction from_oracle(const oracle::RandomSubmodular& r) {
    return SetFunction(r.n, [r](const Subset& s) { return r(s.mask()); });
}

}  // namespace

TEST_CASE("brute force examples") {
    auto comp = two_point_composite();
    auto r = minimize_bruteforce(comp.as_set_function());
    CHECK(r.minimizer == Subset::from_indices(2, {1}));
    CHECK(r.value == doctest::Approx(2.0));

    auto z = minimize_bruteforce(zero_function(3));
    CHECK(z.minimizer.empty());
    CHECK(z.value == 0.0);

    auto m = minimize_bruteforce(modular_function(Eigen::Vector3d(-1, 2, -3)));
    CHECK(m.minimizer == Subset::from_indices(3, {0, 2}));
    CHECK(m.value == doctest::Approx(-4.0));

    BruteForceOptions small;
    small.max_n = 2;
    CHECK_THROWS_AS(minimize_bruteforce(zero_function(3), small), InvalidArgument);
}

TEST_CASE("min-norm examples") {
    auto m = min_norm_point(modular_function(Eigen::Vector3d(-1, 2, -3)));
    CHECK(m.minimizer == Subset::from_indices(3, {0, 2}));
    CHECK(m.value == doctest::Approx(-4.0));
    CHECK(m.gap_certificate == doctest::Approx(0.0));

    auto comp = two_point_composite();
    auto r = min_norm_point(comp.as_set_function());
    CHECK(r.minimizer == Subset::from_indices(2, {1}));
    CHECK(r.value == doctest::Approx(2.0));
}

TEST_CASE("min-norm rejects non-finite values") {
    SetFunction bad(2, [](const Subset& s) { return s.size() == 2 ? std::nan("") : 0.0; });
    CHECK_THROWS(min_norm_point(bad));
}

TEST_CASE("min-norm matches enumeration on random submodular functions") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const std::size_t n = 3 + seed % 8;
        oracle::RandomSubmodular r(n, seed);
        auto f = from_oracle(r);
        auto want = oracle::minimize(n, [&](std::uint64_t m) { return r(m); });
        MinNormOptions o;
        o.tol = 1e-10;
        o.max_iter = 1000;
        auto got = min_norm_point(f, o);
        CHECK(got.value == doctest::Approx(want.value).epsilon(1e-9));
        CHECK(got.minimizer.mask() == want.mask);
        auto pruned = minimize_submodular(f, o);
        CHECK(pruned.value == doctest::Approx(want.value).epsilon(1e-9));
        CHECK(pruned.minimizer.mask() == want.mask);
    }
}

TEST_CASE("min-norm on regression composites, n = 12") {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        auto inst = gen_regression_instance(12, seed, 0.05);
        CompositeFunction comp(inst.fspec, inst.g);
        auto want = minimize_bruteforce(comp.as_set_function());
        MinNormOptions o;
        o.tol = 1e-10;
        o.max_iter = 1000;
        auto got = min_norm_point(comp.as_set_function(), o);
        CHECK(got.minimizer == want.minimizer);
        CHECK(got.value == doctest::Approx(want.value).epsilon(1e-6));
    }
}

TEST_CASE("min-norm flags exhausted iteration budget") {
    auto inst = gen_regression_instance(40, 3, 0.05);
    CompositeFunction comp(inst.fspec, inst.g);
    MinNormOptions o;
    o.max_iter = 1;
    o.tol = 1e-12;
    auto r = min_norm_point(comp.as_set_function(), o);
    CHECK_FALSE(r.converged);
    CHECK(r.gap_certificate > o.tol);
}

TEST_CASE("weighted min-norm point") {
    // Modular F: the base polytope is the single point of its weights.
    MinNormOptions o;
    o.weights = Eigen::Vector3d(1, 2, 3);
    o.require_point = true;
    o.tol = 0.0;
    auto s = solve_min_norm(modular_function(Eigen::Vector3d(-1, 2, -3)), o);
    CHECK(s.state.current_point.isApprox(Eigen::Vector3d(-1, 2, -3)));
    CHECK(s.wolfe_gap == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("semigradient pruning examples") {
    auto b = semigradient_prune(modular_function(Eigen::Vector3d(-1, 2, -3)));
    CHECK(b.lower == Subset::from_indices(3, {0, 2}));
    CHECK(b.upper == Subset::from_indices(3, {0, 2}));

    auto comp = two_point_composite();
    auto c = semigradient_prune(comp.as_set_function());
    CHECK(c.upper == Subset::from_indices(2, {1}));

    auto e = semigradient_prune(zero_function(0));
    CHECK(e.lower.empty());
    CHECK(e.upper.empty());
}

TEST_CASE("pruning bracket contains the minimal minimizer") {
    for (std::uint64_t seed = 100; seed < 140; ++seed) {
        const std::size_t n = 2 + seed % 9;
        oracle::RandomSubmodular r(n, seed);
        auto want = oracle::minimize(n, [&](std::uint64_t m) { return r(m); });
        auto b = semigradient_prune(from_oracle(r));
        auto star = Subset::from_mask(n, want.mask);
        CHECK(b.lower.is_subset_of(star));
        CHECK(star.is_subset_of(b.upper));
    }
}

TEST_CASE("min-norm trace is monotone") {
    auto inst = gen_regression_instance(30, 1, 0.05);
    CompositeFunction comp(inst.fspec, inst.g);
    std::vector<TraceRow> trace;
    auto r = minimize_submodular(comp.as_set_function(), {}, &trace);
    REQUIRE(!trace.empty());
    CHECK(trace.front().iteration == 0);
    for (std::size_t i = 1; i < trace.size(); ++i) {
        CHECK(trace[i].objective <= trace[i - 1].objective + 1e-12);
        CHECK(trace[i].elapsed >= trace[i - 1].elapsed);
    }
    CHECK(trace.back().objective == doctest::Approx(r.value));
}
