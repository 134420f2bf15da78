#include "latsel/sfm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

namespace latsel {

namespace {

void require_finite(double v, const char* who) {
    if (!std::isfinite(v)) throw NumericalError(std::string(who) + ": set function returned a non-finite value");
}

}  // namespace

bool BestSetTracker::offer(const Subset& s, double v) {
    if (!std::isfinite(value) || v < value - tie_tolerance(value)) {
        set = s;
        value = v;
        return true;
    }
    if (v <= value + tie_tolerance(value) && minimal_order_less(s, set)) {
        set = s;
        value = std::min(value, v);
        return true;
    }
    return false;
}

SfmResult minimize_bruteforce(const SetFunction& f, const BruteForceOptions& opts) {
    const std::size_t n = f.ground_size();
    if (n > opts.max_n)
        throw InvalidArgument("minimize_bruteforce: n = " + std::to_string(n) + " exceeds cap " +
                              std::to_string(opts.max_n));
    const auto calls0 = f.oracle_calls();
    const std::uint64_t count = std::uint64_t{1} << n;
    std::vector<double> values(count);
    double best = std::numeric_limits<double>::infinity();
    for (std::uint64_t m = 0; m < count; ++m) {
        values[m] = f(Subset::from_mask(n, m));
        require_finite(values[m], "minimize_bruteforce");
        best = std::min(best, values[m]);
    }
    // First pass finds the exact minimum so ties are judged against it.
    BestSetTracker pick;
    for (std::uint64_t m = 0; m < count; ++m) {
        if (values[m] > best + tie_tolerance(best)) continue;
        auto s = Subset::from_mask(n, m);
        if (pick.set.ground_size() != n || minimal_order_less(s, pick.set)) {
            pick.set = s;
            pick.value = values[m];
        }
    }
    SfmResult r;
    r.minimizer = pick.set;
    r.value = f(pick.set);
    r.gap_certificate = 0.0;
    r.evaluations = f.oracle_calls() - calls0;
    r.iterations = count;
    return r;
}

namespace {

class WolfeSolver {
  public:
    WolfeSolver(const SetFunction& f, const MinNormOptions& opts)
        : f_(f), opts_(opts), n_(f.ground_size()) {
        if (!(opts.tol >= 0.0)) throw InvalidArgument("min_norm_point: tol must be nonnegative");
        if (opts.weights.size() == 0) {
            inv_w_ = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n_));
        } else {
            if (static_cast<std::size_t>(opts.weights.size()) != n_)
                throw InvalidArgument("min_norm_point: weight vector length differs from ground-set size");
            if ((opts.weights.array() <= 0.0).any()) throw InvalidArgument("min_norm_point: weights must be positive");
            inv_w_ = opts.weights.cwiseInverse();
        }
    }

    MinNormSolve run() {
        const auto t0 = std::chrono::steady_clock::now();
        MinNormSolve out;
        const auto calls0 = f_.oracle_calls();
        empty_value_ = f_(Subset(n_));
        require_finite(empty_value_, "min_norm_point");
        best_.offer(Subset(n_), empty_value_);

        if (n_ == 0) {
            out.result = finish(true, 0);
            out.result.evaluations = f_.oracle_calls() - calls0;
            return out;
        }

        Eigen::VectorXd zero = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_));
        corral_.push_back(linear_oracle(zero));
        lambda_ = Eigen::VectorXd::Ones(1);
        x_ = corral_.front();

        bool converged = false;
        std::size_t iter = 0;
        for (; iter < opts_.max_iter; ++iter) {
            Eigen::VectorXd q = linear_oracle(x_);
            const double xx = dot(x_, x_);
            const double wolfe_gap = xx - dot(x_, q);
            out.wolfe_gap = wolfe_gap;
            const double gap = best_.value - lower_bound();

            double scale = 1.0;
            for (const auto& v : corral_) scale = std::max(scale, dot(v, v));
            scale = std::max(scale, dot(q, q));

            if (!opts_.require_point && gap <= opts_.tol) {
                converged = true;
                break;
            }
            if (wolfe_gap <= 1e-12 * scale) {
                converged = true;
                break;
            }
            if (std::any_of(corral_.begin(), corral_.end(), [&](const Eigen::VectorXd& v) { return v == q; })) {
                // No new vertex can improve the point.
                converged = true;
                break;
            }
            corral_.push_back(std::move(q));
            lambda_.conservativeResize(lambda_.size() + 1);
            lambda_[lambda_.size() - 1] = 0.0;
            minor_cycles();
            out.norm_history.push_back(dot(x_, x_));
            out.best_history.push_back(best_.value);
            out.trace.push_back(
                {iter + 1, best_.value, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()});
        }
        if (converged) {
            // Refresh level sets at the final point.
            linear_oracle(x_);
        }
        out.result = finish(converged, iter);
        out.result.evaluations = f_.oracle_calls() - calls0;
        out.state.corral = corral_;
        out.state.convex_weights = lambda_;
        out.state.current_point = x_;
        return out;
    }

  private:
    double dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
        return (a.array() * b.array() * inv_w_.array()).sum();
    }

    /// argmin over the base polytope of <x, q>_W, via the greedy rule on the
    /// ascending order of x_i / w_i. Records the level sets it visits.
    Eigen::VectorXd linear_oracle(const Eigen::VectorXd& x) {
        Eigen::VectorXd key = x.cwiseProduct(inv_w_);
        auto order = ascending_order(key);
        auto v = greedy_base_vertex(f_, order);
        Subset s(n_);
        for (std::size_t k = 0; k < order.size(); ++k) {
            s.insert(order[k]);
            require_finite(v.chain_values[k + 1], "min_norm_point");
            best_.offer(s, v.chain_values[k + 1]);
        }
        return std::move(v.weights);
    }

    /// min F >= F(∅) + sum_i min(x_i, 0) for any x in B(F - F(∅)).
    double lower_bound() const { return empty_value_ + x_.cwiseMin(0.0).sum(); }

    Eigen::VectorXd affine_minimizer() const {
        const auto m = static_cast<Eigen::Index>(corral_.size());
        Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(m + 1, m + 1);
        for (Eigen::Index i = 0; i < m; ++i) {
            kkt(0, i + 1) = kkt(i + 1, 0) = 1.0;
            for (Eigen::Index j = 0; j <= i; ++j)
                kkt(i + 1, j + 1) = kkt(j + 1, i + 1) =
                    dot(corral_[static_cast<std::size_t>(i)], corral_[static_cast<std::size_t>(j)]);
        }
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m + 1);
        rhs[0] = 1.0;
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(kkt);
        cod.setThreshold(opts_.rank_tol);
        Eigen::VectorXd sol = cod.solve(rhs);
        Eigen::VectorXd alpha = sol.tail(m);
        const double s = alpha.sum();
        if (std::abs(s) > 0.0) alpha /= s;
        return alpha;
    }

    void recompute_point() {
        x_.setZero(static_cast<Eigen::Index>(n_));
        for (std::size_t i = 0; i < corral_.size(); ++i) x_ += lambda_[static_cast<Eigen::Index>(i)] * corral_[i];
    }

    void drop_small_weights() {
        std::vector<Eigen::VectorXd> kept;
        std::vector<double> kept_w;
        for (std::size_t i = 0; i < corral_.size(); ++i) {
            if (lambda_[static_cast<Eigen::Index>(i)] > opts_.drop_tol) {
                kept.push_back(std::move(corral_[i]));
                kept_w.push_back(lambda_[static_cast<Eigen::Index>(i)]);
            }
        }
        corral_ = std::move(kept);
        lambda_ = Eigen::Map<Eigen::VectorXd>(kept_w.data(), static_cast<Eigen::Index>(kept_w.size()));
        lambda_ /= lambda_.sum();
    }

    void minor_cycles() {
        for (std::size_t guard = 0; guard < 10 * (n_ + 2); ++guard) {
            Eigen::VectorXd alpha = affine_minimizer();
            if ((alpha.array() > opts_.drop_tol).all()) {
                lambda_ = alpha;
                recompute_point();
                return;
            }
            double theta = 1.0;
            for (Eigen::Index i = 0; i < alpha.size(); ++i) {
                if (alpha[i] <= opts_.drop_tol) {
                    const double denom = lambda_[i] - alpha[i];
                    if (denom > 0.0) theta = std::min(theta, lambda_[i] / denom);
                }
            }
            theta = std::clamp(theta, 0.0, 1.0);
            lambda_ = (1.0 - theta) * lambda_ + theta * alpha;
            drop_small_weights();
            recompute_point();
            if (corral_.size() == 1) return;
        }
    }

    SfmResult finish(bool converged, std::size_t iters) {
        SfmResult r;
        r.minimizer = best_.set;
        r.value = f_(best_.set);
        const double lb = n_ == 0 ? empty_value_ : lower_bound();
        r.gap_certificate = std::max(0.0, r.value - lb);
        r.iterations = iters;
        r.converged = converged || (!opts_.require_point && r.gap_certificate <= opts_.tol);
        return r;
    }

    const SetFunction& f_;
    const MinNormOptions& opts_;
    std::size_t n_;
    Eigen::VectorXd inv_w_;
    double empty_value_ = 0.0;
    BestSetTracker best_;
    std::vector<Eigen::VectorXd> corral_;
    Eigen::VectorXd lambda_;
    Eigen::VectorXd x_;
};

}  // namespace

MinNormSolve solve_min_norm(const SetFunction& f, const MinNormOptions& opts) {
    WolfeSolver solver(f, opts);
    return solver.run();
}

SfmResult min_norm_point(const SetFunction& f, const MinNormOptions& opts) { return solve_min_norm(f, opts).result; }

PruneBracket semigradient_prune(const SetFunction& f) {
    const std::size_t n = f.ground_size();
    PruneBracket b{Subset(n), Subset::full(n)};
    bool changed = true;
    while (changed) {
        changed = false;
        double f_lower = f(b.lower);
        for (auto i : (b.upper - b.lower).indices()) {
            // F(i | lower) bounds F(i | A) from above for every A ⊇ lower.
            const double with_i = f(b.lower.with(i));
            if (with_i - f_lower < -tie_tolerance(f_lower)) {
                b.lower.insert(i);
                f_lower = with_i;
                changed = true;
            }
        }
        double f_upper = f(b.upper);
        for (auto i : (b.upper - b.lower).indices()) {
            // F(i | upper \ i) bounds F(i | A \ i) from below for every A ⊆ upper.
            const double without_i = f(b.upper.without(i));
            if (f_upper - without_i >= -tie_tolerance(f_upper)) {
                b.upper.erase(i);
                f_upper = without_i;
                changed = true;
            }
        }
    }
    return b;
}

SfmResult minimize_submodular(const SetFunction& f, const MinNormOptions& opts, std::vector<TraceRow>* trace) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto calls0 = f.oracle_calls();
    auto bracket = semigradient_prune(f);
    const double prune_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    SfmResult r;
    if (bracket.lower == bracket.upper) {
        r.minimizer = bracket.lower;
        r.value = f(bracket.lower);
        r.gap_certificate = 0.0;
        r.converged = true;
        if (trace) trace->push_back({0, r.value, prune_time});
    } else {
        std::vector<std::size_t> free;
        auto sub = restrict_to_interval(f, bracket.lower, bracket.upper, &free);
        MinNormOptions sub_opts = opts;
        if (opts.weights.size() != 0) {
            sub_opts.weights.resize(static_cast<Eigen::Index>(free.size()));
            for (std::size_t j = 0; j < free.size(); ++j)
                sub_opts.weights[static_cast<Eigen::Index>(j)] = opts.weights[static_cast<Eigen::Index>(free[j])];
        }
        auto solve = solve_min_norm(sub, sub_opts);
        const auto& inner = solve.result;
        r = inner;
        if (trace) {
            trace->push_back({0, f(bracket.lower), prune_time});
            for (auto row : solve.trace) {
                row.elapsed += prune_time;
                trace->push_back(row);
            }
        }
        r.minimizer = bracket.lower;
        for (auto j : inner.minimizer.indices()) r.minimizer.insert(free[j]);
        r.value = f(r.minimizer);
    }
    r.evaluations = f.oracle_calls() - calls0;
    return r;
}

}  // namespace latsel
