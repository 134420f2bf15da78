#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "latsel/lattice.hpp"

namespace latsel {

enum class SignMode { nonnegative, free };

/// f(x) = x^T Q x + p^T x + offset.
class QuadraticSpec {
  public:
    QuadraticSpec() = default;
    /// Validates shapes and symmetry. In nonnegative mode Q must have
    /// nonpositive off-diagonals unless `allow_positive_offdiag` is set.
    QuadraticSpec(Eigen::MatrixXd q, Eigen::VectorXd p, double offset = 0.0, SignMode mode = SignMode::nonnegative,
                  bool allow_positive_offdiag = false);

    std::size_t dim() const { return static_cast<std::size_t>(p_.size()); }
    const Eigen::MatrixXd& q() const { return q_; }
    const Eigen::VectorXd& p() const { return p_; }
    double offset() const { return offset_; }
    SignMode mode() const { return mode_; }
    /// Whether Q passed check_hessian_offdiag at construction.
    bool offdiag_nonpositive() const { return offdiag_ok_; }
    bool separable() const;

    double value(const Eigen::VectorXd& x) const;
    Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;

  private:
    Eigen::MatrixXd q_;
    Eigen::VectorXd p_;
    double offset_ = 0.0;
    SignMode mode_ = SignMode::nonnegative;
    bool offdiag_ok_ = true;
};

/// Raised when Q restricted to the working coordinates has negative curvature.
class IndefiniteError : public NumericalError {
  public:
    IndefiniteError(const std::string& what, std::vector<std::size_t> coords)
        : NumericalError(what), coordinates(std::move(coords)) {}
    std::vector<std::size_t> coordinates;
};

struct InnerSolution {
    Eigen::VectorXd x;
    /// f(x), re-evaluated at return.
    double value = 0.0;
    /// Coordinates of the queried set held at the bound x_i = 0.
    Subset active_set;
    std::size_t iterations = 0;
};

/// min f(x) s.t. x_i = 0 outside `a` (and x >= 0 in nonnegative mode).
/// `warm_start`, if given, must be feasible for the same problem.
InnerSolution solve_restricted_qp(const QuadraticSpec& spec, const Subset& a, double tol = 1e-10,
                                  const Eigen::VectorXd* warm_start = nullptr);

/// A ↦ g(A) + H(A), H(A) = min { f(x) : supp(x) ⊆ A }, with memoized inner
/// solves. Copies share the cache; it is safe to query from several threads.
class CompositeFunction {
  public:
    CompositeFunction(QuadraticSpec fspec, SetFunction g, double qp_tol = 1e-10);

    std::size_t ground_size() const;
    const QuadraticSpec& fspec() const;
    const SetFunction& g() const;

    double eval_H(const Subset& a) const;
    /// Cached witness of H(A), solving if needed.
    InnerSolution solution(const Subset& a) const;
    double operator()(const Subset& a) const;

    /// The composite as a memoizing set-function handle.
    const SetFunction& as_set_function() const;

    std::size_t qp_solves() const;

  private:
    struct State;
    std::shared_ptr<State> state_;
};

CompositeFunction make_composite(QuadraticSpec fspec, SetFunction g, double qp_tol = 1e-10);

/// x* with supp(x*) ⊆ A* and f(x*) = H(A*).
InnerSolution recover_primal(const CompositeFunction& comp, const Subset& a_star);

/// f(x) + g(supp(x)): the objective of the original mixed problem.
double combined_objective(const CompositeFunction& comp, const Eigen::VectorXd& x);
Subset support_of(const Eigen::VectorXd& x);

}  // namespace latsel
