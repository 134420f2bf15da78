#include "doctest.h"

#include "latsel/robust.hpp"
#include "oracles.hpp"

using namespace latsel;

namespace {

/// K one-dimensional losses (w - c_i)^2 + s_i on [lo, hi].
SaddleSpec line_spec(const std::vector<double>& c, const std::vector<double>& s, SetFunction g, double lo, double hi) {
    SaddleSpec spec;
    for (std::size_t i = 0; i < c.size(); ++i) {
        DomainLoss l;
        l.center = Eigen::VectorXd::Constant(1, c[i]);
        l.curvature = Eigen::VectorXd::Ones(1);
        l.shift = s[i];
        spec.losses.push_back(l);
    }
    spec.g = std::move(g);
    spec.x_feasible = FeasibleSet::box(Eigen::VectorXd::Constant(1, lo), Eigen::VectorXd::Constant(1, hi));
    return spec;
}

}  // namespace

TEST_CASE("simplex projection examples") {
    CHECK(project_simplex(Eigen::Vector3d(0.2, 0.3, 0.4)).isApprox(Eigen::Vector3d(0.2, 0.3, 0.4)));
    CHECK(project_simplex(Eigen::Vector3d(2, 0.5, 0.5)).isApprox(Eigen::Vector3d(1, 0, 0)));
    CHECK(project_simplex(Eigen::Vector3d(0.5, 0.5, 0.5)).isApprox(Eigen::Vector3d::Constant(1.0 / 3.0)));
    std::mt19937_64 rng(2);
    std::normal_distribution<double> nd;
    for (int t = 0; t < 50; ++t) {
        Eigen::VectorXd v(6);
        for (auto& x : v) x = nd(rng);
        CHECK((project_simplex(v) - oracle::project_simplex(v)).norm() < 1e-10);
    }
}

TEST_CASE("eval_Q examples") {
    // Losses 3 and 1 at x0 = 0.
    auto spec = line_spec({0, 0}, {3, 1}, modular_function(Eigen::Vector2d(0.5, 0.5)), -1, 1);
    auto r = eval_Q(spec, Eigen::VectorXd::Zero(1));
    CHECK(r.value == doctest::Approx(2.5));
    CHECK(r.p_star.isApprox(Eigen::Vector2d(1, 0)));
    CHECK(r.support == Subset::from_indices(2, {0}));

    auto heavy = line_spec({0, 0}, {3, 1}, modular_function(Eigen::Vector2d(1e6, 1e6)), -1, 1);
    auto h = eval_Q(heavy, Eigen::VectorXd::Zero(1));
    CHECK(h.value == 0.0);
    CHECK(h.p_star.isZero());

    auto free = line_spec({0, 0.5}, {3, 1}, zero_function(2), -1, 1);
    auto f = eval_Q(free, Eigen::VectorXd::Constant(1, 0.9));
    CHECK(f.value == doctest::Approx(std::max(0.81 + 3, 0.16 + 1)));

    CHECK_THROWS_AS(eval_Q(spec, Eigen::VectorXd::Constant(1, 2.0)), InvalidArgument);
}

TEST_CASE("eval_Q matches support enumeration") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto spec = gen_multidomain(2 + seed % 7, seed, 0.3);
        for (double cap : {1.0, 0.4}) {
            spec.z_cap = cap;
            std::mt19937_64 rng(seed);
            std::uniform_real_distribution<double> u(-1.0, 1.0);
            for (int t = 0; t < 10; ++t) {
                Eigen::Vector2d x(u(rng), u(rng));
                Eigen::VectorXd v(static_cast<Eigen::Index>(spec.num_domains()));
                for (std::size_t i = 0; i < spec.num_domains(); ++i) v[static_cast<Eigen::Index>(i)] = spec.losses[i].value(x);
                const double want = oracle::robust_inner(
                    v, [&](std::uint64_t m) { return spec.g(Subset::from_mask(spec.num_domains(), m)); }, cap);
                auto r = eval_Q(spec, x);
                CHECK(r.value == doctest::Approx(want).epsilon(1e-10));
                CHECK(r.p_star.sum() <= 1.0 + 1e-12);
                CHECK(r.p_star.maxCoeff() <= cap + 1e-12);
            }
        }
    }
}

TEST_CASE("eval_Q large K uses the path and stays exact for modular g") {
    auto spec = gen_multidomain(24, 5, 0.05);
    Eigen::Vector2d x(0.1, -0.2);
    Eigen::VectorXd v(24);
    for (int i = 0; i < 24; ++i) v[i] = spec.losses[static_cast<std::size_t>(i)].value(x);
    double want = 0.0;
    for (int i = 0; i < 24; ++i) want = std::max(want, v[i] - spec.g(Subset::from_indices(24, {static_cast<std::size_t>(i)})));
    CHECK(eval_Q(spec, x).value == doctest::Approx(want).epsilon(1e-9));
}

TEST_CASE("subgradient inequality") {
    auto spec = gen_multidomain(5, 1, 0.1);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < 30; ++t) {
        Eigen::Vector2d x(u(rng), u(rng)), y(u(rng), u(rng));
        auto qx = eval_Q(spec, x);
        CHECK(eval_Q(spec, y).value >= qx.value + qx.subgrad.dot(y - x) - 1e-9);
    }
}

TEST_CASE("robust solve on the two-center example") {
    auto spec = line_spec({0, 2}, {0, 0}, zero_function(2), 0, 2);
    auto tr = robust_solve(spec, 4000);
    CHECK(tr.iterates.size() == 4000);
    CHECK(tr.averaged_x[0] == doctest::Approx(1.0).epsilon(0.02));
    CHECK(eval_Q(spec, tr.averaged_x).value == doctest::Approx(1.0).epsilon(0.02));
    // Fine grid check of the minimax value.
    double best = HUGE_VAL;
    for (int i = 0; i <= 2000; ++i) {
        const double w = 2.0 * i / 2000.0;
        best = std::min(best, std::max(w * w, (w - 2) * (w - 2)));
    }
    CHECK(best == doctest::Approx(1.0));

    auto one = robust_solve(spec, 1);
    CHECK(one.iterates.size() == 1);
    CHECK_THROWS_AS(robust_solve(spec, 0), InvalidArgument);
}

TEST_CASE("single domain without penalty minimizes that loss") {
    auto spec = line_spec({0.3}, {0.5}, zero_function(1), -1, 1);
    auto tr = robust_solve(spec, 4000);
    CHECK(tr.averaged_x[0] == doctest::Approx(0.3).epsilon(0.05));
}

TEST_CASE("max-min orientation") {
    SaddleSpec spec;
    DomainLoss l;
    l.center = Eigen::VectorXd::Constant(1, 0.2);
    l.curvature = Eigen::VectorXd::Constant(1, -1.0);
    l.shift = -0.5;
    spec.losses = {l};
    spec.g = zero_function(1);
    spec.orientation = Orientation::max_outer_min_inner;
    spec.x_feasible = FeasibleSet::ball(Eigen::VectorXd::Zero(1), 1.0);
    // min_p p f(x) with f < 0 puts full mass on the domain.
    auto q = eval_Q(spec, Eigen::VectorXd::Zero(1));
    CHECK(q.value == doctest::Approx(-0.54));
    auto tr = robust_solve(spec, 2000);
    CHECK(tr.averaged_x[0] == doctest::Approx(0.2).epsilon(0.05));
    spec.orientation = Orientation::min_outer_max_inner;
    CHECK_THROWS_AS(spec.validate(), InvalidArgument);
}

TEST_CASE("multidomain generator") {
    auto a = gen_multidomain(4, 9);
    auto b = gen_multidomain(4, 9);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(a.losses[i].center == b.losses[i].center);
        CHECK(a.losses[i].curvature == b.losses[i].curvature);
        CHECK(a.losses[i].shift == b.losses[i].shift);
        CHECK((a.losses[i].center.array().abs() <= 0.8).all());
    }
    CHECK(check_monotone_bruteforce(a.g));
    CHECK(a.g(Subset(4)) == 0.0);
}
