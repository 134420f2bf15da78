#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "latsel/lattice.hpp"

namespace latsel {

struct SfmResult {
    Subset minimizer;
    /// F(minimizer), re-evaluated at return.
    double value = 0.0;
    /// Upper bound on value - min F. Zero for the brute-force oracle.
    double gap_certificate = 0.0;
    /// Oracle calls (memo misses) charged to this solve.
    std::size_t evaluations = 0;
    std::size_t iterations = 0;
    bool converged = true;
};

/// One progress record of an iterative solver.
struct TraceRow {
    std::size_t iteration = 0;
    /// Best objective found so far.
    double objective = 0.0;
    /// Seconds since the solve started.
    double elapsed = 0.0;
};

/// Values within this distance of the best one count as ties.
inline double tie_tolerance(double value) { return 1e-10 * std::max(1.0, std::abs(value)); }

/// Running best (value, set) pair; near-ties go to the minimal order.
struct BestSetTracker {
    Subset set;
    double value = std::numeric_limits<double>::infinity();
    /// True if the stored set changed.
    bool offer(const Subset& s, double v);
};

struct BruteForceOptions {
    std::size_t max_n = 16;
};

/// Exhaustive minimization. Among ties returns the minimal minimizer:
/// smallest cardinality, then smallest bitmask.
SfmResult minimize_bruteforce(const SetFunction& f, const BruteForceOptions& opts = {});

/// Working set of Wolfe's algorithm.
struct MinNormState {
    std::vector<Eigen::VectorXd> corral;
    Eigen::VectorXd convex_weights;
    Eigen::VectorXd current_point;
};

struct MinNormOptions {
    /// Stop once the discrete duality gap falls below tol.
    double tol = 1e-4;
    /// Major cycles.
    std::size_t max_iter = 100;
    /// Diagonal metric: minimize sum_i s_i^2 / w_i over the base polytope.
    /// Empty means unit weights.
    Eigen::VectorXd weights;
    /// Keep iterating until the min-norm point itself is found instead of
    /// stopping at the first tol-optimal set. Needed when the point is the
    /// output (regularization paths).
    bool require_point = false;
    double rank_tol = 1e-12;
    double drop_tol = 1e-12;
};

struct MinNormSolve {
    SfmResult result;
    MinNormState state;
    /// Squared (weighted) norm of the current point after each major cycle.
    std::vector<double> norm_history;
    /// Best set value found after each major cycle.
    std::vector<double> best_history;
    /// Best value and elapsed time after each major cycle.
    std::vector<TraceRow> trace;
    /// ||x||^2 - min_q <x, q> at exit; zero at the exact min-norm point.
    double wolfe_gap = 0.0;
};

/// Fujishige-Wolfe minimum-norm point on the base polytope of F - F(∅).
/// The minimizer is read off the level sets of the current point.
MinNormSolve solve_min_norm(const SetFunction& f, const MinNormOptions& opts = {});
SfmResult min_norm_point(const SetFunction& f, const MinNormOptions& opts = {});

struct PruneBracket {
    Subset lower;
    Subset upper;
};

/// Shrinks [∅, V] to an interval containing the minimal minimizer, using
/// modular bounds at the current bracket ends until a fixpoint.
PruneBracket semigradient_prune(const SetFunction& f);

/// Pruning followed by min-norm on the remaining interval. `trace`, if given,
/// receives a row after pruning (iteration 0) and after each major cycle.
SfmResult minimize_submodular(const SetFunction& f, const MinNormOptions& opts = {},
                              std::vector<TraceRow>* trace = nullptr);

}  // namespace latsel
