#pragma once

// Reference computations used only by tests. Each one is written directly
// from the definition and shares no code path with the library solvers.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using MaskFn = std::function<double(std::uint64_t)>;

struct SetMin {
    double value = std::numeric_limits<double>::infinity();
    /// Smallest cardinality, then smallest mask, among values within 1e-10.
    std::uint64_t mask = 0;
};

inline SetMin minimize(std::size_t n, const MaskFn& f) {
    std::vector<double> vals(std::size_t{1} << n);
    double best = std::numeric_limits<double>::infinity();
    for (std::uint64_t m = 0; m < vals.size(); ++m) {
        vals[m] = f(m);
        best = std::min(best, vals[m]);
    }
    SetMin out;
    out.value = best;
    bool found = false;
    for (std::uint64_t m = 0; m < vals.size(); ++m) {
        if (vals[m] > best + 1e-10 * std::max(1.0, std::abs(best))) continue;
        if (!found || std::popcount(m) < std::popcount(out.mask) ||
            (std::popcount(m) == std::popcount(out.mask) && m < out.mask)) {
            out.mask = m;
            found = true;
        }
    }
    return out;
}

/// min x^T Q x + p^T x + c over x >= 0 with supp x inside `allowed`, by
/// solving the stationarity system on every sub-support and keeping the
/// feasible solutions. `nonnegative = false` solves once on `allowed`.
inline double restricted_qp(const Eigen::MatrixXd& q, const Eigen::VectorXd& p, double c, std::uint64_t allowed,
                            bool nonnegative = true, Eigen::VectorXd* argmin = nullptr) {
    const auto n = p.size();
    double best = std::numeric_limits<double>::infinity();
    auto try_support = [&](std::uint64_t s) {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index i = 0; i < n; ++i)
            if ((s >> i) & 1u) idx.push_back(i);
        Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
        if (!idx.empty()) {
            const auto k = static_cast<Eigen::Index>(idx.size());
            Eigen::MatrixXd qs(k, k);
            Eigen::VectorXd ps(k);
            for (Eigen::Index a = 0; a < k; ++a) {
                ps[a] = p[idx[a]];
                for (Eigen::Index b = 0; b < k; ++b) qs(a, b) = q(idx[a], idx[b]);
            }
            Eigen::VectorXd xs = (2.0 * qs).fullPivLu().solve(-ps);
            if (nonnegative && (xs.array() < -1e-12).any()) return;
            for (Eigen::Index a = 0; a < k; ++a) x[idx[a]] = std::max(nonnegative ? 0.0 : -HUGE_VAL, xs[a]);
        }
        const double v = x.dot(q * x) + p.dot(x) + c;
        if (v < best) {
            best = v;
            if (argmin) *argmin = x;
        }
    };
    if (!nonnegative) {
        try_support(allowed);
        return best;
    }
    // All sub-masks of `allowed`, including the empty one.
    for (std::uint64_t s = allowed;; s = (s - 1) & allowed) {
        try_support(s);
        if (s == 0) break;
    }
    return best;
}

/// Lovász extension from the level-set integral, u sorted independently.
inline double lovasz(std::size_t n, const MaskFn& f, const Eigen::VectorXd& u) {
    std::vector<double> levels(u.data(), u.data() + u.size());
    std::sort(levels.begin(), levels.end(), std::greater<>());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    const double f0 = f(0);
    double total = f0;
    for (std::size_t k = 0; k < levels.size(); ++k) {
        std::uint64_t s = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (u[static_cast<Eigen::Index>(i)] >= levels[k]) s |= std::uint64_t{1} << i;
        const double next = k + 1 < levels.size() ? levels[k + 1] : 0.0;
        total += (levels[k] - next) * (f(s) - f0);
    }
    return total;
}

/// Projection onto {p >= 0, Σ p <= 1} by bisection on the shift.
inline Eigen::VectorXd project_simplex(const Eigen::VectorXd& v) {
    Eigen::VectorXd c = v.cwiseMax(0.0);
    if (c.sum() <= 1.0) return c;
    double lo = 0.0, hi = v.maxCoeff();
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if ((v.array() - mid).cwiseMax(0.0).sum() > 1.0) lo = mid;
        else hi = mid;
    }
    return (v.array() - 0.5 * (lo + hi)).cwiseMax(0.0).matrix();
}

/// sup over {0 <= p <= cap, Σ p <= 1} of Σ p_i v_i - g(supp p) by
/// enumerating supports and solving each face LP as a fractional knapsack
/// with unit costs.
inline double robust_inner(const Eigen::VectorXd& v, const MaskFn& g, double cap) {
    const auto k = static_cast<std::size_t>(v.size());
    double best = -g(0);
    for (std::uint64_t s = 1; s < (std::uint64_t{1} << k); ++s) {
        std::vector<double> vals;
        for (std::size_t i = 0; i < k; ++i)
            if ((s >> i) & 1u) vals.push_back(v[static_cast<Eigen::Index>(i)]);
        std::sort(vals.begin(), vals.end(), std::greater<>());
        double left = 1.0, lin = 0.0;
        for (double x : vals) {
            if (x <= 0.0) break;
            const double w = std::min(cap, left);
            lin += w * x;
            left -= w;
        }
        best = std::max(best, lin - g(s));
    }
    return best;
}

/// Random submodular function on n elements: a concave-of-modular sum, a
/// graph cut with nonnegative weights and a modular term.
struct RandomSubmodular {
    std::size_t n = 0;
    std::vector<Eigen::VectorXd> concave_weights;
    Eigen::MatrixXd cut;
    Eigen::VectorXd modular;
    double offset = 0.0;

    RandomSubmodular(std::size_t n_, std::uint64_t seed) : n(n_) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u01(0.0, 1.0), um(-1.5, 1.0);
        for (int t = 0; t < 2; ++t) {
            Eigen::VectorXd w(static_cast<Eigen::Index>(n));
            for (auto& x : w) x = u01(rng);
            concave_weights.push_back(w);
        }
        cut = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        for (Eigen::Index i = 0; i < cut.rows(); ++i)
            for (Eigen::Index j = i + 1; j < cut.cols(); ++j)
                if (u01(rng) < 0.4) cut(i, j) = cut(j, i) = 0.5 * u01(rng);
        modular.resize(static_cast<Eigen::Index>(n));
        for (auto& x : modular) x = um(rng);
        offset = u01(rng) - 0.5;
    }

    double operator()(std::uint64_t m) const {
        double v = offset;
        for (const auto& w : concave_weights) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                if ((m >> i) & 1u) s += w[static_cast<Eigen::Index>(i)];
            v += std::sqrt(s);
        }
        for (std::size_t i = 0; i < n; ++i) {
            const bool in = (m >> i) & 1u;
            if (in) v += modular[static_cast<Eigen::Index>(i)];
            for (std::size_t j = 0; j < n; ++j)
                if (in && !((m >> j) & 1u)) v += cut(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        }
        return v;
    }
};

inline bool is_submodular(std::size_t n, const MaskFn& f, double tol) {
    for (std::uint64_t s = 0; s < (std::uint64_t{1} << n); ++s)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                const auto bi = std::uint64_t{1} << i, bj = std::uint64_t{1} << j;
                if ((s & bi) || (s & bj)) continue;
                if (f(s | bi) + f(s | bj) < f(s | bi | bj) + f(s) - tol) return false;
            }
    return true;
}

}  // namespace oracle
