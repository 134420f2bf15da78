#include "latsel/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace latsel {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

}  // namespace

PgdResult pgd_lovasz_minimize(const SetFunction& f, const PgdOptions& opts) {
    if (opts.max_iter == 0) throw InvalidArgument("pgd_lovasz_minimize: max_iter must be >= 1");
    if (!(opts.tol >= 0.0)) throw InvalidArgument("pgd_lovasz_minimize: tol must be nonnegative");
    const auto t0 = Clock::now();
    const std::size_t n = f.ground_size();
    const auto calls0 = f.oracle_calls();
    const auto dim = static_cast<Eigen::Index>(n);

    PgdResult out;
    BestSetTracker best;
    const double f0 = f(Subset(n));
    best.offer(Subset(n), f0);
    Eigen::VectorXd u = Eigen::VectorXd::Constant(dim, 0.5);
    out.u_best = u;
    Eigen::VectorXd s_sum = Eigen::VectorXd::Zero(dim);
    double lower = -std::numeric_limits<double>::infinity();
    bool converged = false;
    std::size_t t = 1;
    for (; t <= opts.max_iter; ++t) {
        auto order = descending_order(u);
        auto v = greedy_base_vertex(f, order);
        Subset s(n);
        bool improved = false;
        for (std::size_t k = 0; k < n; ++k) {
            s.insert(order[k]);
            if (!std::isfinite(v.chain_values[k + 1]))
                throw NumericalError("pgd_lovasz_minimize: set function returned a non-finite value");
            improved = best.offer(s, v.chain_values[k + 1]) || improved;
        }
        if (improved) out.u_best = u;

        s_sum += v.weights;
        const Eigen::VectorXd avg = s_sum / static_cast<double>(t);
        lower = std::max({lower, f0 + avg.cwiseMin(0.0).sum(), f0 + v.weights.cwiseMin(0.0).sum()});
        out.trace.push_back({t, best.value, seconds_since(t0)});
        if (best.value - lower <= opts.tol) {
            converged = true;
            break;
        }

        const double norm2 = v.weights.squaredNorm();
        if (norm2 == 0.0) break;
        const double extension = f0 + v.weights.dot(u);
        const double target = best.value - 1.0 / static_cast<double>(t + 1);
        const double step = (extension - target) / norm2;
        u = (u - step * v.weights).cwiseMax(0.0).cwiseMin(1.0);
    }

    // Drop elements whose removal keeps the value within the tie tolerance.
    for (bool shrunk = true; shrunk;) {
        shrunk = false;
        for (auto i : best.set.indices()) {
            const auto smaller = best.set.without(i);
            if (best.offer(smaller, f(smaller))) {
                shrunk = true;
                break;
            }
        }
    }

    out.result.minimizer = best.set;
    out.result.value = f(best.set);
    out.result.gap_certificate = std::max(0.0, out.result.value - lower);
    out.result.iterations = std::min(t, opts.max_iter);
    out.result.converged = converged;
    out.result.evaluations = f.oracle_calls() - calls0;
    return out;
}

PgdResult pgd_lovasz_minimize(const CompositeFunction& comp, const PgdOptions& opts) {
    return pgd_lovasz_minimize(comp.as_set_function(), opts);
}

// ------------------------------------------------------------ discretized

DiscretizationGrid DiscretizationGrid::uniform(std::size_t n, std::size_t k, double lo, double hi) {
    DiscretizationGrid g;
    g.k = k;
    g.box_lo = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), lo);
    g.box_hi = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), hi);
    return g;
}

double DiscretizationGrid::value(std::size_t i, std::size_t j) const {
    const auto ii = static_cast<Eigen::Index>(i);
    if (j + 1 == k) return box_hi[ii];
    return box_lo[ii] + (box_hi[ii] - box_lo[ii]) * static_cast<double>(j) / static_cast<double>(k - 1);
}

void DiscretizationGrid::validate(std::size_t n) const {
    if (k < 2) throw InvalidArgument("DiscretizationGrid: k must be >= 2");
    if (static_cast<std::size_t>(box_lo.size()) != n || static_cast<std::size_t>(box_hi.size()) != n)
        throw InvalidArgument("DiscretizationGrid: box bounds must have length n");
    if (!(box_lo.array() < box_hi.array()).all()) throw InvalidArgument("DiscretizationGrid: need box_lo < box_hi");
}

namespace {

/// Least-squares fit of y by a nonincreasing sequence (pool adjacent violators).
void isotonic_nonincreasing(const double* y, std::size_t m, double* out) {
    std::vector<double> sum;
    std::vector<std::size_t> count;
    sum.reserve(m);
    count.reserve(m);
    for (std::size_t j = 0; j < m; ++j) {
        sum.push_back(y[j]);
        count.push_back(1);
        while (sum.size() >= 2) {
            const std::size_t b = sum.size() - 1;
            if (sum[b - 1] / static_cast<double>(count[b - 1]) >= sum[b] / static_cast<double>(count[b])) break;
            sum[b - 1] += sum[b];
            count[b - 1] += count[b];
            sum.pop_back();
            count.pop_back();
        }
    }
    std::size_t pos = 0;
    for (std::size_t b = 0; b < sum.size(); ++b) {
        const double mean = sum[b] / static_cast<double>(count[b]);
        for (std::size_t c = 0; c < count[b]; ++c) out[pos++] = mean;
    }
}

/// Walks the product lattice from the bottom corner, tracking F = f + g∘supp
/// incrementally.
class GridWalker {
  public:
    GridWalker(const QuadraticSpec& fspec, const SetFunction& g, const DiscretizationGrid& grid)
        : f_(fspec), g_(g), grid_(grid), n_(fspec.dim()), m_(grid.k - 1) {}

    std::size_t cells() const { return n_ * m_; }

    /// F at a grid point, evaluated directly.
    double evaluate(const std::vector<std::size_t>& level) const {
        Eigen::VectorXd x = point(level);
        return f_.value(x) + g_(support_of(x));
    }

    Eigen::VectorXd point(const std::vector<std::size_t>& level) const {
        Eigen::VectorXd x(static_cast<Eigen::Index>(n_));
        for (std::size_t i = 0; i < n_; ++i) x[static_cast<Eigen::Index>(i)] = grid_.value(i, level[i]);
        return x;
    }

    /// Greedy vertex for the order of rho (descending, ties by flattened
    /// index). Offers every visited grid point to the incumbent.
    Eigen::VectorXd walk(const Eigen::VectorXd& rho, double& bottom_value) {
        std::vector<std::size_t> order(cells());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return rho[static_cast<Eigen::Index>(a)] > rho[static_cast<Eigen::Index>(b)];
        });

        std::vector<std::size_t> level(n_, 0);
        Eigen::VectorXd x = point(level);
        Eigen::VectorXd qx = f_.q() * x;
        double fval = f_.value(x);
        Subset supp = support_of(x);
        double gval = g_(supp);
        double cur = fval + gval;
        bottom_value = cur;
        offer(level, cur);

        Eigen::VectorXd w(static_cast<Eigen::Index>(cells()));
        for (auto e : order) {
            const std::size_t i = e / m_;
            const auto ii = static_cast<Eigen::Index>(i);
            const double next = grid_.value(i, level[i] + 1);
            const double delta = next - x[ii];
            fval += delta * (2.0 * qx[ii] + f_.p()[ii]) + f_.q()(ii, ii) * delta * delta;
            qx += delta * f_.q().col(ii);
            const bool was_on = x[ii] != 0.0;
            x[ii] = next;
            const bool is_on = next != 0.0;
            if (was_on != is_on) {
                if (is_on)
                    supp.insert(i);
                else
                    supp.erase(i);
                gval = g_(supp);
            }
            const double val = fval + gval;
            w[static_cast<Eigen::Index>(i * m_ + level[i])] = val - cur;
            cur = val;
            ++level[i];
            offer(level, cur);
        }
        return w;
    }

    const std::vector<std::size_t>& best_level() const { return best_level_; }
    double best_value() const { return best_value_; }

  private:
    void offer(const std::vector<std::size_t>& level, double v) {
        if (v < best_value_) {
            best_value_ = v;
            best_level_ = level;
        }
    }

    const QuadraticSpec& f_;
    const SetFunction& g_;
    const DiscretizationGrid& grid_;
    std::size_t n_;
    std::size_t m_;
    std::vector<std::size_t> best_level_;
    double best_value_ = std::numeric_limits<double>::infinity();
};

struct ActiveVertex {
    Eigen::VectorXd v;
    double weight;
};

}  // namespace

FwResult discretized_fw_minimize(const QuadraticSpec& fspec, const SetFunction& g, const DiscretizationGrid& grid,
                                 const FwOptions& opts) {
    const std::size_t n = fspec.dim();
    if (!g.valid() || g.ground_size() != n) throw InvalidArgument("discretized_fw_minimize: g must be over n elements");
    grid.validate(n);
    if (opts.max_iter == 0) throw InvalidArgument("discretized_fw_minimize: max_iter must be >= 1");
    if (n * grid.k > opts.max_cells)
        throw InvalidArgument("discretized_fw_minimize: n*k = " + std::to_string(n * grid.k) + " exceeds the cap " +
                              std::to_string(opts.max_cells));
    const auto t0 = Clock::now();
    const std::size_t m = grid.k - 1;
    GridWalker walker(fspec, g, grid);
    const auto cells = static_cast<Eigen::Index>(walker.cells());

    FwResult out;
    double bottom = 0.0;
    std::vector<ActiveVertex> active;
    active.push_back({walker.walk(Eigen::VectorXd::Zero(cells), bottom), 1.0});
    Eigen::VectorXd w = active.front().v;
    Eigen::VectorXd rho(cells);

    auto lower_bound = [&] {
        double lb = bottom;
        for (std::size_t i = 0; i < n; ++i) {
            double prefix = 0.0, lowest = 0.0;
            for (std::size_t j = 0; j < m; ++j) {
                prefix += w[static_cast<Eigen::Index>(i * m + j)];
                lowest = std::min(lowest, prefix);
            }
            lb += lowest;
        }
        return lb;
    };

    double gap = std::numeric_limits<double>::infinity();
    std::size_t it = 1;
    for (; it <= opts.max_iter; ++it) {
        Eigen::VectorXd neg_w = -w;
        for (std::size_t i = 0; i < n; ++i) isotonic_nonincreasing(neg_w.data() + i * m, m, rho.data() + i * m);
        Eigen::VectorXd s = walker.walk(rho, bottom);
        gap = walker.best_value() - lower_bound();
        out.trace.push_back({it, walker.best_value(), seconds_since(t0)});
        if (gap <= opts.tol) break;

        const double scale = std::max(1.0, rho.squaredNorm());
        if (rho.dot(s - w) <= 1e-14 * scale) break;

        std::size_t away = 0;
        double away_score = std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < active.size(); ++a) {
            const double score = rho.dot(active[a].v);
            if (score < away_score) {
                away_score = score;
                away = a;
            }
        }
        Eigen::VectorXd d = s - active[away].v;
        const double slope = rho.dot(d);
        const double dd = d.squaredNorm();
        if (!(slope > 0.0) || dd == 0.0) break;
        const double step = std::min(active[away].weight, slope / dd);
        w += step * d;
        active[away].weight -= step;
        auto same = std::find_if(active.begin(), active.end(), [&](const ActiveVertex& av) { return av.v == s; });
        if (same != active.end())
            same->weight += step;
        else
            active.push_back({std::move(s), step});
        active.erase(std::remove_if(active.begin(), active.end(), [](const ActiveVertex& av) { return av.weight <= 1e-14; }),
                     active.end());
    }

    out.level = walker.best_level();
    out.x = walker.point(out.level);
    out.value = walker.evaluate(out.level);
    out.gap_certificate = std::max(0.0, out.value - lower_bound());
    out.iterations = std::min(it, opts.max_iter);
    out.active_vertices = active.size();
    return out;
}

}  // namespace latsel
