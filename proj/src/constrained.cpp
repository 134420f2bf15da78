#include "latsel/constrained.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "latsel/report.hpp"
#include "latsel/sfm.hpp"

namespace latsel {

void BudgetSpec::validate(std::size_t n) const {
    if (std::isnan(budget)) throw InvalidArgument("BudgetSpec: budget is NaN");
    if (kind == BudgetKind::support_knapsack) {
        if (static_cast<std::size_t>(w.size()) != n)
            throw InvalidArgument("BudgetSpec: knapsack weights must have length " + std::to_string(n));
        if (!(w.array() > 0.0).all() || !w.allFinite())
            throw InvalidArgument("BudgetSpec: knapsack weights must be finite and > 0");
        return;
    }
    if (!(z_cap > 0.0) || !std::isfinite(z_cap)) throw InvalidArgument("BudgetSpec: z_cap must be finite and > 0");
    if (scalar_W.size() != n) throw InvalidArgument("BudgetSpec: need one W_i per index");
    if (!scalar_f.empty() && scalar_f.size() != n) throw InvalidArgument("BudgetSpec: need one f_i per index");
    for (std::size_t i = 0; i < n; ++i) {
        const auto& wi = scalar_W[i];
        if (!(wi.b >= 0.0) || !(wi.derivative(z_cap) >= 0.0) || !(wi(z_cap) > 0.0))
            throw InvalidArgument("BudgetSpec: W_" + std::to_string(i) + " is not strictly increasing on [0, z_cap]");
    }
}

double BudgetSpec::cost(const Eigen::VectorXd& x) const {
    double c = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (kind == BudgetKind::support_knapsack) {
            if (x[i] != 0.0) c += w[i];
        } else {
            c += scalar_W[static_cast<std::size_t>(i)](x[i]);
        }
    }
    return c;
}

ScalarSolve scalar_solve(const ScalarQuadratic& f, const ScalarQuadratic& w, double mu, double z_cap) {
    if (!(z_cap > 0.0)) throw InvalidArgument("scalar_H: z_cap must be > 0");
    if (!(mu >= 0.0)) throw InvalidArgument("scalar_H: mu must be >= 0");
    const double a = f.a + mu * w.a;
    const double b = f.b + mu * w.b;
    ScalarSolve best{0.0, 0.0};
    auto consider = [&](double z) {
        const double v = (a * z + b) * z;
        if (v < best.value) best = {v, z};
    };
    if (a > 0.0) consider(std::clamp(-b / (2.0 * a), 0.0, z_cap));
    consider(z_cap);
    return best;
}

double scalar_H(const ScalarQuadratic& f, const ScalarQuadratic& w, double mu, double z_cap) {
    return scalar_solve(f, w, mu, z_cap).value;
}

ScalarProfile scalar_profile(const ScalarQuadratic& f, const ScalarQuadratic& w, double z_cap) {
    if (!(z_cap > 0.0)) throw InvalidArgument("scalar_profile: z_cap must be > 0");
    if (!(w.b >= 0.0) || !(w.derivative(z_cap) >= 0.0) || !(w(z_cap) > 0.0))
        throw InvalidArgument("scalar_profile: W is not strictly increasing on [0, z_cap]");
    // H(μ) = 0 iff the slope b + μ W.b at 0 and the chord to z_cap are both >= 0.
    double c = 0.0;
    if (w.b > 0.0)
        c = std::max(c, -f.b / w.b);
    else if (f.b < 0.0)
        throw InvalidArgument("scalar_profile: H never reaches zero (W'(0) = 0 and f'(0) < 0)");
    c = std::max(c, -(f.a * z_cap + f.b) / (w.a * z_cap + w.b));
    ScalarProfile p;
    p.zero_point = c;
    p.values = [f, w, z_cap](double mu) { return scalar_H(f, w, mu, z_cap); };
    return p;
}

Subset threshold_chain(const ThresholdChain& chain, double mu) {
    if (!(mu >= chain.epsilon))
        throw InvalidArgument("threshold_chain: mu = " + std::to_string(mu) + " is below the floor epsilon = " +
                              std::to_string(chain.epsilon));
    const auto n = static_cast<std::size_t>(chain.u_star.size());
    Subset s(n);
    const double margin = chain.tie_tol * std::max(1.0, std::abs(mu));
    for (std::size_t i = 0; i < n; ++i)
        if (chain.u_star[static_cast<Eigen::Index>(i)] > mu + margin) s.insert(i);
    return s;
}

namespace {

std::vector<ScalarQuadratic> scalars_from_diagonal(const QuadraticSpec& fspec) {
    if (!fspec.separable())
        throw InvalidArgument("solve_regularization_path: the continuous budget path needs a separable f");
    std::vector<ScalarQuadratic> out(fspec.dim());
    for (std::size_t i = 0; i < fspec.dim(); ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        out[i] = {fspec.q()(ii, ii), fspec.p()[ii]};
    }
    return out;
}

/// Minimal minimizer, exactly for small ground sets.
Subset exact_minimal_minimizer(const SetFunction& f) {
    if (f.ground_size() <= 12) return minimize_bruteforce(f).minimizer;
    MinNormOptions mo;
    mo.tol = 1e-12;
    mo.max_iter = 100000;
    return minimize_submodular(f, mo).minimizer;
}

}  // namespace

ThresholdChain solve_regularization_path(const CompositeFunction& comp, const BudgetSpec& budget,
                                         const PathOptions& opts) {
    const std::size_t n = comp.ground_size();
    if (budget.kind == BudgetKind::continuous_separable) {
        BudgetSpec b = budget;
        b.scalar_f = scalars_from_diagonal(comp.fspec());
        return solve_regularization_path(comp.g(), b, opts);
    }
    budget.validate(n);
    const double eps = opts.epsilon.value_or(0.0);
    if (!(eps >= 0.0)) throw InvalidArgument("solve_regularization_path: epsilon must be >= 0");

    MinNormOptions mo;
    mo.weights = budget.w;
    mo.require_point = true;
    mo.tol = 0.0;
    mo.max_iter = opts.max_iter;
    auto solve = solve_min_norm(comp.as_set_function(), mo);

    ThresholdChain chain;
    chain.epsilon = eps;
    chain.u_star = (-solve.state.current_point.cwiseQuotient(budget.w)).cwiseMax(0.0);
    if (n == 0) chain.u_star.resize(0);
    chain.certificate = std::max(0.0, solve.wolfe_gap);
    chain.converged = solve.result.converged;
    return chain;
}

ThresholdChain solve_regularization_path(const SetFunction& g, const BudgetSpec& budget, const PathOptions& opts) {
    if (budget.kind != BudgetKind::continuous_separable)
        throw InvalidArgument("solve_regularization_path: knapsack budgets need the composite g + H");
    const std::size_t n = g.ground_size();
    budget.validate(n);
    if (budget.scalar_f.size() != n) throw InvalidArgument("solve_regularization_path: need one f_i per index");
    const double eps = opts.epsilon.value_or(1e-6);
    if (!(eps >= 0.0)) throw InvalidArgument("solve_regularization_path: epsilon must be >= 0");
    if (!(opts.tol > 0.0)) throw InvalidArgument("solve_regularization_path: tol must be > 0");

    std::vector<ScalarProfile> prof;
    for (std::size_t i = 0; i < n; ++i) prof.push_back(scalar_profile(budget.scalar_f[i], budget.scalar_W[i], budget.z_cap));

    // Indices whose profile is already zero at ε never enter a minimal minimizer.
    std::vector<std::size_t> active;
    double hi = eps;
    for (std::size_t i = 0; i < n; ++i) {
        if (prof[i].values(eps) < 0.0) {
            active.push_back(i);
            hi = std::max(hi, prof[i].zero_point);
        }
    }

    ThresholdChain chain;
    chain.epsilon = eps;
    chain.u_star = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), eps);
    chain.certificate = 0.0;
    if (active.empty()) return chain;
    const std::size_t m = active.size();

    auto lift = [&](const Subset& sub) {
        Subset full(n);
        for (auto j : sub.indices()) full.insert(active[j]);
        return full;
    };
    auto solve_at = [&](double mu) {
        std::vector<double> h(m);
        for (std::size_t j = 0; j < m; ++j) h[j] = prof[active[j]].values(mu);
        SetFunction f_mu(m, [&, h](const Subset& sub) {
            double v = g(lift(sub));
            for (auto j : sub.indices()) v += h[j];
            return v;
        });
        return exact_minimal_minimizer(f_mu);
    };

    double width = 0.0;
    auto recurse = [&](auto&& self, double lo, const Subset& a_lo, double up, const Subset& a_up) -> void {
        if (a_lo == a_up) return;
        if (up - lo <= opts.tol * std::max(1.0, up)) {
            for (auto j : (a_lo - a_up).indices()) chain.u_star[static_cast<Eigen::Index>(active[j])] = 0.5 * (lo + up);
            width = std::max(width, up - lo);
            return;
        }
        const double mid = 0.5 * (lo + up);
        // Clamp into the bracket so the chain stays nested under rounding.
        Subset a_mid = (solve_at(mid) & a_lo) | a_up;
        self(self, lo, a_lo, mid, a_mid);
        self(self, mid, a_mid, up, a_up);
    };
    Subset a_eps = solve_at(eps);
    Subset a_top = solve_at(hi) & a_eps;
    for (auto j : a_top.indices()) chain.u_star[static_cast<Eigen::Index>(active[j])] = hi;
    recurse(recurse, eps, a_eps, hi, a_top);
    chain.certificate = width;
    return chain;
}

double path_objective(const CompositeFunction& comp, const BudgetSpec& budget, const Eigen::VectorXd& u) {
    if (budget.kind != BudgetKind::support_knapsack) throw InvalidArgument("path_objective: knapsack budgets only");
    budget.validate(comp.ground_size());
    if (u.size() != budget.w.size()) throw InvalidArgument("path_objective: dimension mismatch");
    return lovasz_extension(comp.as_set_function(), u) + 0.5 * budget.w.dot(u.cwiseAbs2());
}

std::vector<BudgetSelection> evaluate_path(const ThresholdChain& chain, const CompositeFunction& comp,
                                           const BudgetSpec& budget, const std::vector<double>& grid) {
    const std::size_t n = comp.ground_size();
    if (static_cast<std::size_t>(chain.u_star.size()) != n) throw InvalidArgument("evaluate_path: chain dimension mismatch");
    budget.validate(n);
    std::vector<ScalarQuadratic> scalars;
    if (budget.kind == BudgetKind::continuous_separable) scalars = scalars_from_diagonal(comp.fspec());

    std::vector<BudgetSelection> rows;
    for (double mu : grid) {
        BudgetSelection row;
        row.mu = mu;
        row.set = threshold_chain(chain, mu);
        if (budget.kind == BudgetKind::support_knapsack) {
            row.solution = recover_primal(comp, row.set);
        } else {
            // μ-regularized primal: each selected coordinate at its scalar minimizer.
            row.solution.x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
            for (auto i : row.set.indices())
                row.solution.x[static_cast<Eigen::Index>(i)] =
                    scalar_solve(scalars[i], budget.scalar_W[i], mu, budget.z_cap).z;
            row.solution.value = comp.fspec().value(row.solution.x);
            row.solution.active_set = Subset(n);
        }
        row.objective = combined_objective(comp, row.solution.x);
        row.cost = budget.cost(row.solution.x);
        rows.push_back(std::move(row));
    }
    return rows;
}

BudgetSelection select_under_budget(const ThresholdChain& chain, const CompositeFunction& comp,
                                    const BudgetSpec& budget, const std::vector<double>& grid) {
    if (grid.empty()) throw InvalidArgument("select_under_budget: empty mu grid");
    auto rows = evaluate_path(chain, comp, budget, grid);
    const double slack = 1e-12 * std::max(1.0, std::abs(budget.budget));
    const BudgetSelection* best = nullptr;
    const BudgetSelection* least_bad = nullptr;
    for (const auto& r : rows) {
        if (r.cost <= budget.budget + slack) {
            if (!best || r.objective < best->objective - tie_tolerance(best->objective) ||
                (r.objective <= best->objective + tie_tolerance(best->objective) && r.mu > best->mu))
                best = &r;
        } else if (!least_bad || r.cost < least_bad->cost ||
                   (r.cost == least_bad->cost && r.objective < least_bad->objective)) {
            least_bad = &r;
        }
    }
    if (best) return *best;
    throw InfeasibleError("select_under_budget: no grid value of mu meets the budget " + format_real(budget.budget) +
                              "; least violating cost " + format_real(least_bad->cost) + " at mu = " +
                              format_real(least_bad->mu),
                          *least_bad);
}

void write_path_csv(std::ostream& out, const std::vector<BudgetSelection>& rows) {
    out << "mu,subset,W_value,objective\n";
    for (const auto& r : rows)
        out << format_real(r.mu) << ',' << r.set.to_hex() << ',' << format_real(r.cost) << ',' << format_real(r.objective)
            << '\n';
}

}  // namespace latsel
