#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "latsel/inner.hpp"
#include "latsel/lattice.hpp"

namespace latsel {

/// z ↦ a z^2 + b z on z >= 0.
struct ScalarQuadratic {
    double a = 0.0;
    double b = 0.0;
    double operator()(double z) const { return (a * z + b) * z; }
    double derivative(double z) const { return 2.0 * a * z + b; }
};

enum class BudgetKind { support_knapsack, continuous_separable };

struct BudgetSpec {
    BudgetKind kind = BudgetKind::support_knapsack;
    /// Knapsack weights, one per index, all > 0.
    Eigen::VectorXd w;
    /// Continuous kind: per-coordinate losses f_i and budget terms W_i.
    std::vector<ScalarQuadratic> scalar_f;
    std::vector<ScalarQuadratic> scalar_W;
    double budget = std::numeric_limits<double>::infinity();
    /// Upper end of the scalar minimizations.
    double z_cap = 1.0;

    void validate(std::size_t n) const;
    /// Knapsack: sum of w over supp(x). Continuous: sum_i W_i(x_i).
    double cost(const Eigen::VectorXd& x) const;
};

/// min over z in [0, z_cap] of f(z) + mu W(z), with its minimizer.
struct ScalarSolve {
    double value;
    double z;
};
ScalarSolve scalar_solve(const ScalarQuadratic& f, const ScalarQuadratic& w, double mu, double z_cap);
double scalar_H(const ScalarQuadratic& f, const ScalarQuadratic& w, double mu, double z_cap);

struct ScalarProfile {
    std::function<double(double)> values;
    /// Smallest c >= 0 with H(c) = 0.
    double zero_point = 0.0;
};
/// Requires W strictly increasing on [0, z_cap]. Rejects profiles that never
/// reach zero.
ScalarProfile scalar_profile(const ScalarQuadratic& f, const ScalarQuadratic& w, double z_cap);

/// u* on the μ scale: A^μ = {i : u*_i > μ} for every μ >= epsilon.
struct ThresholdChain {
    Eigen::VectorXd u_star;
    double epsilon = 0.0;
    /// Knapsack: Wolfe gap of the min-norm point. Continuous: bisection width.
    double certificate = 0.0;
    bool converged = true;
    /// Margin applied to the strict threshold against rounding.
    double tie_tol = 1e-9;
};

Subset threshold_chain(const ThresholdChain& chain, double mu);

struct PathOptions {
    /// Default: 0 for knapsack, 1e-6 for continuous budgets.
    std::optional<double> epsilon;
    /// Knapsack: min-norm major-cycle cap. Continuous: unused.
    std::size_t max_iter = 100000;
    /// Continuous: breakpoint resolution on the μ axis.
    double tol = 1e-10;
};

/// Knapsack kind: u* = max(0, -s*/w) with s* the w^{-1}-weighted min-norm
/// point of the base polytope of g + H, i.e. the minimizer of
/// (g + H)_L(u) + 1/2 Σ w_j u_j^2. Continuous kind: requires a separable f,
/// whose diagonal gives the scalar losses; forwards to the overload below.
ThresholdChain solve_regularization_path(const CompositeFunction& comp, const BudgetSpec& budget,
                                         const PathOptions& opts = {});

/// Continuous kind over g and the budget's scalar descriptors. Breakpoints of
/// the minimal minimizers of g(A) + Σ_{i∈A} H_i(μ) are located by bisection
/// with exact SFM at each probe.
ThresholdChain solve_regularization_path(const SetFunction& g, const BudgetSpec& budget, const PathOptions& opts = {});

/// Knapsack objective (g + H)_L(u) + 1/2 Σ w u^2.
double path_objective(const CompositeFunction& comp, const BudgetSpec& budget, const Eigen::VectorXd& u);

struct BudgetSelection {
    double mu = 0.0;
    Subset set;
    InnerSolution solution;
    /// f(x) + g(supp x).
    double objective = 0.0;
    /// W(x).
    double cost = 0.0;
};

class InfeasibleError : public std::runtime_error {
  public:
    InfeasibleError(const std::string& what, BudgetSelection candidate)
        : std::runtime_error(what), least_violating(std::move(candidate)) {}
    BudgetSelection least_violating;
};

/// Evaluates A^μ and its primal for every μ in the grid.
std::vector<BudgetSelection> evaluate_path(const ThresholdChain& chain, const CompositeFunction& comp,
                                           const BudgetSpec& budget, const std::vector<double>& grid);

/// Among grid points whose primal meets the budget, the best f(x) + g(supp x);
/// ties go to the larger μ. Throws InfeasibleError when none does.
BudgetSelection select_under_budget(const ThresholdChain& chain, const CompositeFunction& comp,
                                    const BudgetSpec& budget, const std::vector<double>& grid);

/// CSV with columns mu,subset,W_value,objective.
void write_path_csv(std::ostream& out, const std::vector<BudgetSelection>& rows);

}  // namespace latsel
