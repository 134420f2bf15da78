#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "latsel/inner.hpp"
#include "latsel/lattice.hpp"

namespace latsel {

enum class PenaltyKind { none, cardinality, range, interval };

std::string to_string(PenaltyKind kind);
PenaltyKind parse_penalty(const std::string& name);

/// A generated problem: f (as a quadratic) plus the support penalty g.
struct InstanceSpec {
    QuadraticSpec fspec;
    SetFunction g;
    PenaltyKind penalty = PenaltyKind::none;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    double lambda = 0.0;
    double mu_smooth = 0.0;
    /// b for regression, y for denoising.
    Eigen::VectorXd b_target;
    /// Design matrix D with Q = D^T D, when the instance has one.
    Eigen::MatrixXd design;
};

/// λ|A|.
SetFunction cardinality_penalty_g(std::size_t n, double lambda);
/// λ((n-1) + max A - min A + |A|) for nonempty A, 0 for ∅.
SetFunction range_penalty_g(std::size_t n, double lambda);
/// λ(|A| + number of maximal runs of consecutive indices in A).
SetFunction interval_penalty_g(std::size_t n, double lambda);
SetFunction make_penalty(PenaltyKind kind, std::size_t n, double lambda);

/// Deterministic test signal: two raised-cosine bumps on a zero baseline,
/// centered at 25% and 65% of the index range with half-widths 10% and 15%
/// and heights 1 and 0.6.
Eigen::VectorXd bump_signal(std::size_t n);

/// f(x) = ||D x - b||^2 with D^T D = C + C^T + nI, C_ij ~ U(-1, 0), and
/// b = bump_signal(n). C is redrawn (up to 100 times) until the Cholesky
/// factorization succeeds.
InstanceSpec gen_regression_instance(std::size_t n, std::uint64_t seed, double lambda,
                                     PenaltyKind penalty = PenaltyKind::range);

/// f(x) = 1/2 ||x - y||^2 + μ Σ (x_i - x_{i+1})^2 in free sign mode, g the
/// interval penalty.
InstanceSpec denoising_instance(const Eigen::VectorXd& y, double mu_smooth, double lambda);

/// y = bump_signal(n) + w, w ~ N(0, noise_variance I).
InstanceSpec gen_denoising_instance(std::size_t n, std::uint64_t seed, double mu_smooth = 0.8, double lambda = 0.05,
                                    double noise_variance = 0.1);

struct LiftedInstance {
    InstanceSpec instance;
    /// Whether the 2n-dimensional Hessian passes check_hessian_offdiag.
    bool offdiag_nonpositive = false;
};

/// ||A x - b||^2 over x in R^n rewritten over (x+, x-) >= 0, with g ≡ 0.
LiftedInstance lift_least_squares(const Eigen::MatrixXd& a, const Eigen::VectorXd& b);

/// max_{i != j} of the Gram matrix of the column-normalized A (signed unless
/// `absolute`). Zero for a single column.
double coherence(const Eigen::MatrixXd& a, bool absolute = false);

/// JSON document (row-major matrices) sufficient to rebuild the instance.
std::string instance_to_json(const InstanceSpec& inst);
InstanceSpec instance_from_json(const std::string& text);

}  // namespace latsel
