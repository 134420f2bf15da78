#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "latsel/lattice.hpp"

namespace latsel {

/// Euclidean projection onto {p >= 0, Σ p <= 1}.
Eigen::VectorXd project_simplex(const Eigen::VectorXd& v);

/// (x - c)^T diag(m) (x - c) + s.
struct DomainLoss {
    Eigen::VectorXd center;
    Eigen::VectorXd curvature;
    double shift = 0.0;

    double value(const Eigen::VectorXd& x) const;
    Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;
};

enum class FeasibleKind { box, ball };

struct FeasibleSet {
    FeasibleKind kind = FeasibleKind::box;
    /// Box bounds.
    Eigen::VectorXd lo, hi;
    /// Ball center and radius.
    Eigen::VectorXd center;
    double radius = 1.0;

    static FeasibleSet box(Eigen::VectorXd lo, Eigen::VectorXd hi);
    static FeasibleSet ball(Eigen::VectorXd center, double radius);

    std::size_t dim() const;
    Eigen::VectorXd project(const Eigen::VectorXd& x) const;
    bool contains(const Eigen::VectorXd& x, double tol = 1e-9) const;
    /// Box center or ball center.
    Eigen::VectorXd start() const;
};

enum class Orientation {
    /// min_x max_p Σ p_i f_i(x) - g(supp p), f_i convex.
    min_outer_max_inner,
    /// max_x min_p Σ p_i f_i(x) + g(supp p), f_i concave.
    max_outer_min_inner,
};

struct SaddleSpec {
    std::vector<DomainLoss> losses;
    /// Penalty over the K domains; monotone submodular with g(∅) = 0.
    SetFunction g;
    FeasibleSet x_feasible;
    Orientation orientation = Orientation::min_outer_max_inner;
    /// Per-domain weight cap: 0 <= p_i <= z_cap.
    double z_cap = 1.0;

    std::size_t num_domains() const { return losses.size(); }
    void validate() const;
};

struct InnerResult {
    /// Q(x0).
    double value = 0.0;
    Eigen::VectorXd subgrad;
    Eigen::VectorXd p_star;
    Subset support;
};

/// Inner problem at x0 with a subgradient of Q. Each candidate support is
/// filled greedily by decreasing loss. Exact support enumeration for K <= 20;
/// beyond that the candidates are the sets of the Lagrange path of the budget
/// Σ p <= 1 and their singletons.
InnerResult eval_Q(const SaddleSpec& spec, const Eigen::VectorXd& x0);

struct RobustIterate {
    Eigen::VectorXd x;
    double q_value = 0.0;
    Subset support;
};

struct RobustTrace {
    /// x^(1), ..., x^(T), each after one projected subgradient step.
    std::vector<RobustIterate> iterates;
    Eigen::VectorXd averaged_x;
    std::size_t T = 0;
    /// Index into iterates of the best Q value (min or max per orientation).
    std::size_t best_index = 0;
    double best_value = 0.0;
};

/// T projected subgradient steps of length 1/sqrt(T) from the feasible-set
/// center, descending for min-outer problems and ascending otherwise.
RobustTrace robust_solve(const SaddleSpec& spec, std::size_t T);

/// K two-dimensional quadratic domain losses on [-1,1]^2 with centers in
/// [-0.8,0.8]^2, curvatures in [0.5,2], shifts in [0.5,1]; g(A) = Σ_{i∈A} λ_i
/// with λ_i = lambda·U(0.5,1.5).
SaddleSpec gen_multidomain(std::size_t K, std::uint64_t seed, double lambda = 0.1);

/// CSV with columns iteration,Q_value,support.
void write_robust_trace_csv(std::ostream& out, const RobustTrace& trace);

}  // namespace latsel
