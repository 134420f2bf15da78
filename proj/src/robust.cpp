#include "latsel/robust.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <ostream>
#include <random>
#include <string>

#include "latsel/constrained.hpp"
#include "latsel/report.hpp"

namespace latsel {

Eigen::VectorXd project_simplex(const Eigen::VectorXd& v) {
    if (!v.allFinite()) throw InvalidArgument("project_simplex: non-finite input");
    Eigen::VectorXd clipped = v.cwiseMax(0.0);
    if (clipped.sum() <= 1.0) return clipped;
    // Projection onto {p >= 0, Σ p = 1}: p = max(v - θ, 0).
    std::vector<double> sorted(v.data(), v.data() + v.size());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cumulative = 0.0, theta = 0.0;
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        cumulative += sorted[k];
        const double t = (cumulative - 1.0) / static_cast<double>(k + 1);
        if (sorted[k] - t > 0.0) theta = t;
    }
    return (v.array() - theta).cwiseMax(0.0).matrix();
}

double DomainLoss::value(const Eigen::VectorXd& x) const {
    return (x - center).cwiseAbs2().dot(curvature) + shift;
}

Eigen::VectorXd DomainLoss::gradient(const Eigen::VectorXd& x) const {
    return 2.0 * curvature.cwiseProduct(x - center);
}

FeasibleSet FeasibleSet::box(Eigen::VectorXd lo, Eigen::VectorXd hi) {
    if (lo.size() != hi.size() || !(lo.array() <= hi.array()).all())
        throw InvalidArgument("FeasibleSet::box: need lo <= hi of equal length");
    FeasibleSet s;
    s.kind = FeasibleKind::box;
    s.lo = std::move(lo);
    s.hi = std::move(hi);
    return s;
}

FeasibleSet FeasibleSet::ball(Eigen::VectorXd center, double radius) {
    if (!(radius > 0.0)) throw InvalidArgument("FeasibleSet::ball: radius must be > 0");
    FeasibleSet s;
    s.kind = FeasibleKind::ball;
    s.center = std::move(center);
    s.radius = radius;
    return s;
}

std::size_t FeasibleSet::dim() const {
    return static_cast<std::size_t>(kind == FeasibleKind::box ? lo.size() : center.size());
}

Eigen::VectorXd FeasibleSet::project(const Eigen::VectorXd& x) const {
    if (static_cast<std::size_t>(x.size()) != dim()) throw InvalidArgument("FeasibleSet::project: dimension mismatch");
    if (kind == FeasibleKind::box) return x.cwiseMax(lo).cwiseMin(hi);
    const Eigen::VectorXd d = x - center;
    const double norm = d.norm();
    return norm <= radius ? x : Eigen::VectorXd(center + d * (radius / norm));
}

bool FeasibleSet::contains(const Eigen::VectorXd& x, double tol) const {
    if (static_cast<std::size_t>(x.size()) != dim()) return false;
    if (kind == FeasibleKind::box) return (x.array() >= lo.array() - tol).all() && (x.array() <= hi.array() + tol).all();
    return (x - center).norm() <= radius + tol;
}

Eigen::VectorXd FeasibleSet::start() const { return kind == FeasibleKind::box ? Eigen::VectorXd(0.5 * (lo + hi)) : center; }

void SaddleSpec::validate() const {
    const std::size_t k = losses.size();
    if (k == 0) throw InvalidArgument("SaddleSpec: need at least one domain");
    if (!g.valid() || g.ground_size() != k) throw InvalidArgument("SaddleSpec: g must be over the K domains");
    if (!(z_cap > 0.0)) throw InvalidArgument("SaddleSpec: z_cap must be > 0");
    const auto d = static_cast<Eigen::Index>(x_feasible.dim());
    for (std::size_t i = 0; i < k; ++i) {
        const auto& l = losses[i];
        if (l.center.size() != d || l.curvature.size() != d)
            throw InvalidArgument("SaddleSpec: loss " + std::to_string(i) + " has the wrong dimension");
        const bool convex = (l.curvature.array() >= 0.0).all();
        const bool concave = (l.curvature.array() <= 0.0).all();
        if (orientation == Orientation::min_outer_max_inner ? !convex : !concave)
            throw InvalidArgument("SaddleSpec: loss " + std::to_string(i) + " has the wrong curvature for the orientation");
    }
}

namespace {

double orientation_sign(const SaddleSpec& spec) {
    return spec.orientation == Orientation::min_outer_max_inner ? 1.0 : -1.0;
}

/// Best weights on the face of the support S: fill the largest positive v_i
/// first, each up to z_cap, until the mass reaches 1.
struct FaceFill {
    double linear = 0.0;
    std::vector<std::pair<std::size_t, double>> weights;
};

FaceFill fill_face(const Eigen::VectorXd& v, std::vector<std::size_t> members, double z_cap) {
    std::stable_sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
        return v[static_cast<Eigen::Index>(a)] > v[static_cast<Eigen::Index>(b)];
    });
    FaceFill out;
    double left = 1.0;
    for (std::size_t i : members) {
        const double vi = v[static_cast<Eigen::Index>(i)];
        if (!(vi > 0.0) || left <= 0.0) break;
        const double w = std::min(z_cap, left);
        out.weights.emplace_back(i, w);
        out.linear += w * vi;
        left -= w;
    }
    return out;
}

}  // namespace

InnerResult eval_Q(const SaddleSpec& spec, const Eigen::VectorXd& x0) {
    spec.validate();
    if (!spec.x_feasible.contains(x0)) throw InvalidArgument("eval_Q: x0 is outside the feasible set");
    const std::size_t k = spec.num_domains();
    const double sign = orientation_sign(spec);
    // Inner maximization of Σ p_i v_i - g(supp p) over {0 <= p <= z_cap, Σ p <= 1}.
    Eigen::VectorXd v(static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < k; ++i) v[static_cast<Eigen::Index>(i)] = sign * spec.losses[i].value(x0);

    double best_value = -spec.g(Subset(k));
    Subset best_support(k);
    FaceFill best_fill;
    auto offer = [&](const std::vector<std::size_t>& members) {
        auto fill = fill_face(v, members, spec.z_cap);
        std::vector<std::size_t> used;
        for (const auto& [i, w] : fill.weights) used.push_back(i);
        auto support = Subset::from_indices(k, used);
        const double val = fill.linear - spec.g(support);
        const double tie = tie_tolerance(best_value);
        if (val > best_value + tie || (val >= best_value - tie && minimal_order_less(support, best_support))) {
            best_value = val;
            best_support = support;
            best_fill = std::move(fill);
        }
    };

    if (k <= 20) {
        for (std::uint64_t m = 1; m < (std::uint64_t{1} << k); ++m) offer(Subset::from_mask(k, m).indices());
    } else {
        BudgetSpec budget;
        budget.kind = BudgetKind::continuous_separable;
        budget.z_cap = spec.z_cap;
        budget.budget = 1.0;
        for (std::size_t i = 0; i < k; ++i) {
            budget.scalar_f.push_back({0.0, -v[static_cast<Eigen::Index>(i)]});
            budget.scalar_W.push_back({0.0, 1.0});
        }
        PathOptions po;
        po.epsilon = 0.0;
        auto chain = solve_regularization_path(spec.g, budget, po);
        // Distinct path sets are the strict level sets of u*.
        std::vector<double> levels(chain.u_star.data(), chain.u_star.data() + chain.u_star.size());
        levels.push_back(chain.epsilon);
        std::sort(levels.begin(), levels.end());
        levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
        for (double mu : levels) {
            if (mu < chain.epsilon) continue;
            const auto members = threshold_chain(chain, mu).indices();
            offer(members);
            for (std::size_t i : members) offer({i});
        }
    }

    InnerResult r;
    r.p_star = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k));
    r.subgrad = Eigen::VectorXd::Zero(x0.size());
    r.support = best_support;
    for (const auto& [i, w] : best_fill.weights) {
        r.p_star[static_cast<Eigen::Index>(i)] = w;
        r.subgrad += w * spec.losses[i].gradient(x0);
    }
    r.value = sign * best_value;
    return r;
}

RobustTrace robust_solve(const SaddleSpec& spec, std::size_t T) {
    if (T == 0) throw InvalidArgument("robust_solve: T must be >= 1");
    spec.validate();
    const double sign = orientation_sign(spec);
    const double step = 1.0 / std::sqrt(static_cast<double>(T));
    RobustTrace trace;
    trace.T = T;
    Eigen::VectorXd x = spec.x_feasible.start();
    auto q = eval_Q(spec, x);
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(x.size());
    for (std::size_t t = 0; t < T; ++t) {
        x = spec.x_feasible.project(x - sign * step * q.subgrad);
        q = eval_Q(spec, x);
        trace.iterates.push_back({x, q.value, q.support});
        sum += x;
        const bool better = t == 0 || (sign > 0 ? q.value < trace.best_value : q.value > trace.best_value);
        if (better) {
            trace.best_value = q.value;
            trace.best_index = t;
        }
    }
    trace.averaged_x = sum / static_cast<double>(T);
    return trace;
}

SaddleSpec gen_multidomain(std::size_t K, std::uint64_t seed, double lambda) {
    if (K == 0) throw InvalidArgument("gen_multidomain: K must be >= 1");
    if (!(lambda >= 0.0)) throw InvalidArgument("gen_multidomain: lambda must be >= 0");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> center(-0.8, 0.8), curv(0.5, 2.0), shift(0.5, 1.0), scale(0.5, 1.5);
    SaddleSpec spec;
    for (std::size_t i = 0; i < K; ++i) {
        DomainLoss l;
        l.center = Eigen::Vector2d(center(rng), center(rng));
        l.curvature = Eigen::Vector2d(curv(rng), curv(rng));
        l.shift = shift(rng);
        spec.losses.push_back(std::move(l));
    }
    Eigen::VectorXd weights(static_cast<Eigen::Index>(K));
    for (Eigen::Index i = 0; i < weights.size(); ++i) weights[i] = lambda * scale(rng);
    spec.g = modular_function(weights);
    spec.x_feasible = FeasibleSet::box(Eigen::VectorXd::Constant(2, -1.0), Eigen::VectorXd::Constant(2, 1.0));
    return spec;
}

void write_robust_trace_csv(std::ostream& out, const RobustTrace& trace) {
    out << "iteration,Q_value,support\n";
    for (std::size_t t = 0; t < trace.iterates.size(); ++t)
        out << (t + 1) << ',' << format_real(trace.iterates[t].q_value) << ',' << trace.iterates[t].support.to_hex() << '\n';
}

}  // namespace latsel
