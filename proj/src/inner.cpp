#include "latsel/inner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <optional>
#include <cstdint>
#include <limits>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>
#include <utility>

namespace latsel {

QuadraticSpec::QuadraticSpec(Eigen::MatrixXd q, Eigen::VectorXd p, double offset, SignMode mode,
                             bool allow_positive_offdiag)
    : q_(std::move(q)), p_(std::move(p)), offset_(offset), mode_(mode) {
    if (q_.rows() != q_.cols() || q_.rows() != p_.size())
        throw InvalidArgument("QuadraticSpec: Q must be n x n and p of length n");
    if (!q_.allFinite() || !p_.allFinite() || !std::isfinite(offset_))
        throw InvalidArgument("QuadraticSpec: non-finite coefficients");
    offdiag_ok_ = check_hessian_offdiag(q_);  // also rejects asymmetric Q
    if (mode_ == SignMode::nonnegative && !offdiag_ok_ && !allow_positive_offdiag)
        throw InvalidArgument("QuadraticSpec: positive off-diagonal entries in nonnegative mode; pass "
                              "allow_positive_offdiag to override");
    // Exact symmetry for the solver.
    q_ = 0.5 * (q_ + q_.transpose()).eval();
}

bool QuadraticSpec::separable() const {
    for (Eigen::Index i = 0; i < q_.rows(); ++i)
        for (Eigen::Index j = 0; j < q_.cols(); ++j)
            if (i != j && q_(i, j) != 0.0) return false;
    return true;
}

double QuadraticSpec::value(const Eigen::VectorXd& x) const {
    if (x.size() != p_.size()) throw InvalidArgument("QuadraticSpec::value: dimension mismatch");
    return x.dot(q_ * x) + p_.dot(x) + offset_;
}

Eigen::VectorXd QuadraticSpec::gradient(const Eigen::VectorXd& x) const {
    if (x.size() != p_.size()) throw InvalidArgument("QuadraticSpec::gradient: dimension mismatch");
    return 2.0 * q_ * x + p_;
}

namespace {

using Index = Eigen::Index;

Eigen::MatrixXd principal(const Eigen::MatrixXd& q, const std::vector<std::size_t>& idx) {
    const auto m = static_cast<Index>(idx.size());
    Eigen::MatrixXd out(m, m);
    for (Index r = 0; r < m; ++r)
        for (Index c = 0; c < m; ++c) out(r, c) = q(static_cast<Index>(idx[static_cast<std::size_t>(r)]),
                                                    static_cast<Index>(idx[static_cast<std::size_t>(c)]));
    return out;
}

[[noreturn]] void throw_indefinite(const Eigen::MatrixXd& sub, const std::vector<std::size_t>& idx) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sub);
    Eigen::VectorXd v = eig.eigenvectors().col(0);
    std::vector<std::size_t> coords;
    const double vmax = v.cwiseAbs().maxCoeff();
    for (Index k = 0; k < v.size(); ++k)
        if (std::abs(v[k]) > 1e-3 * vmax) coords.push_back(idx[static_cast<std::size_t>(k)]);
    std::string names;
    for (auto c : coords) names += (names.empty() ? "" : ",") + std::to_string(c);
    throw IndefiniteError("solve_restricted_qp: negative curvature " + std::to_string(eig.eigenvalues()[0]) +
                              " along coordinates {" + names + "}",
                          std::move(coords));
}

/// Solves 2 Q_FF z = -p_F. Semidefinite systems get the minimum-norm solution.
Eigen::VectorXd solve_stationary(const QuadraticSpec& spec, const std::vector<std::size_t>& idx) {
    const auto m = static_cast<Index>(idx.size());
    Eigen::VectorXd rhs(m);
    for (Index k = 0; k < m; ++k) rhs[k] = -0.5 * spec.p()[static_cast<Index>(idx[static_cast<std::size_t>(k)])];
    Eigen::MatrixXd sub = principal(spec.q(), idx);
    Eigen::LLT<Eigen::MatrixXd> llt(sub);
    if (llt.info() == Eigen::Success) return llt.solve(rhs);

    const double scale = std::max(1.0, sub.cwiseAbs().maxCoeff());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sub, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues()[0] < -1e-10 * scale) throw_indefinite(sub, idx);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(sub);
    cod.setThreshold(1e-12);
    Eigen::VectorXd z = cod.solve(rhs);
    if ((sub * z - rhs).cwiseAbs().maxCoeff() > 1e-8 * std::max(1.0, rhs.cwiseAbs().maxCoeff()))
        throw NumericalError("solve_restricted_qp: objective unbounded below on a singular face");
    return z;
}

double value_on_support(const QuadraticSpec& spec, const Eigen::VectorXd& x, const std::vector<std::size_t>& supp) {
    double v = spec.offset();
    for (auto i : supp) {
        const auto ii = static_cast<Index>(i);
        double row = 0.0;
        for (auto j : supp) row += spec.q()(ii, static_cast<Index>(j)) * x[static_cast<Index>(j)];
        v += x[ii] * row + spec.p()[ii] * x[ii];
    }
    return v;
}

}  // namespace

InnerSolution solve_restricted_qp(const QuadraticSpec& spec, const Subset& a, double tol,
                                  const Eigen::VectorXd* warm_start) {
    if (!(tol > 0.0)) throw InvalidArgument("solve_restricted_qp: tol must be positive");
    if (a.ground_size() != spec.dim()) throw InvalidArgument("solve_restricted_qp: subset dimension mismatch");
    const auto n = static_cast<Index>(spec.dim());
    InnerSolution sol;
    sol.x = Eigen::VectorXd::Zero(n);
    sol.active_set = Subset(spec.dim());
    auto allowed = a.indices();

    if (spec.mode() == SignMode::free) {
        if (!allowed.empty()) {
            Eigen::VectorXd z = solve_stationary(spec, allowed);
            for (std::size_t k = 0; k < allowed.size(); ++k) sol.x[static_cast<Index>(allowed[k])] = z[static_cast<Index>(k)];
        }
        sol.value = value_on_support(spec, sol.x, allowed);
        sol.iterations = 1;
        return sol;
    }

    // Lawson-Hanson style primal active set on the allowed coordinates.
    std::vector<char> is_free(spec.dim(), 0);
    if (warm_start) {
        if (warm_start->size() != n) throw InvalidArgument("solve_restricted_qp: warm start dimension mismatch");
        for (auto i : allowed) {
            const double v = (*warm_start)[static_cast<Index>(i)];
            if (v > 0.0) {
                sol.x[static_cast<Index>(i)] = v;
                is_free[i] = 1;
            }
        }
    }
    const double tol_eff = tol * std::max(1.0, spec.p().cwiseAbs().maxCoeff());
    const std::size_t max_iter = 20 * (allowed.size() + 1) + 100;
    std::size_t iter = 0;
    std::size_t just_added = std::numeric_limits<std::size_t>::max();
    bool need_solve = warm_start != nullptr;

    auto free_list = [&] {
        std::vector<std::size_t> f;
        for (auto i : allowed)
            if (is_free[i]) f.push_back(i);
        return f;
    };

    while (true) {
        if (++iter > max_iter) throw NumericalError("solve_restricted_qp: active-set iteration limit reached");
        if (need_solve) {
            // Inner loop: move toward the stationary point of the free face,
            // releasing coordinates that hit zero.
            while (true) {
                auto fl = free_list();
                if (fl.empty()) break;
                Eigen::VectorXd z = solve_stationary(spec, fl);
                bool feasible = true;
                for (std::size_t k = 0; k < fl.size(); ++k)
                    if (z[static_cast<Index>(k)] <= 0.0) feasible = false;
                if (feasible) {
                    for (std::size_t k = 0; k < fl.size(); ++k) sol.x[static_cast<Index>(fl[k])] = z[static_cast<Index>(k)];
                    break;
                }
                double alpha = 1.0;
                for (std::size_t k = 0; k < fl.size(); ++k) {
                    const double zk = z[static_cast<Index>(k)];
                    if (zk <= 0.0) {
                        const double xk = sol.x[static_cast<Index>(fl[k])];
                        alpha = std::min(alpha, xk / (xk - zk));
                    }
                }
                for (std::size_t k = 0; k < fl.size(); ++k) {
                    const auto i = static_cast<Index>(fl[k]);
                    sol.x[i] += alpha * (z[static_cast<Index>(k)] - sol.x[i]);
                    if (sol.x[i] <= 1e-15 * std::max(1.0, std::abs(z[static_cast<Index>(k)])) ||
                        (z[static_cast<Index>(k)] <= 0.0 && sol.x[i] <= 0.0)) {
                        sol.x[i] = 0.0;
                        is_free[fl[k]] = 0;
                    }
                }
                if (just_added < is_free.size() && !is_free[just_added]) {
                    // The entering coordinate left immediately: its gradient was
                    // at noise level, so the current point is optimal.
                    need_solve = false;
                    just_added = std::numeric_limits<std::size_t>::max();
                    goto kkt_done;
                }
                if (++iter > max_iter) throw NumericalError("solve_restricted_qp: active-set iteration limit reached");
            }
        }
        {
            // Pricing: most negative gradient among bound coordinates.
            auto fl = free_list();
            std::size_t enter = std::numeric_limits<std::size_t>::max();
            double most_negative = -tol_eff;
            for (auto i : allowed) {
                if (is_free[i]) continue;
                const auto ii = static_cast<Index>(i);
                double g = spec.p()[ii];
                for (auto j : fl) g += 2.0 * spec.q()(ii, static_cast<Index>(j)) * sol.x[static_cast<Index>(j)];
                if (g < most_negative) {
                    most_negative = g;
                    enter = i;
                }
            }
            if (enter == std::numeric_limits<std::size_t>::max()) break;
            is_free[enter] = 1;
            just_added = enter;
            need_solve = true;
        }
    }
kkt_done:
    std::vector<std::size_t> supp;
    for (auto i : allowed) {
        if (sol.x[static_cast<Index>(i)] > 0.0)
            supp.push_back(i);
        else
            sol.active_set.insert(i);
    }
    sol.value = value_on_support(spec, sol.x, supp);
    sol.iterations = iter;
    return sol;
}

// ------------------------------------------------------------ composite

namespace {

struct CachedSolve {
    double value;
    std::vector<std::pair<std::uint32_t, double>> x;
    std::size_t iterations;
};

struct CompositeCore {
    QuadraticSpec fspec;
    SetFunction g;
    double tol;
    mutable std::shared_mutex mutex;
    std::unordered_map<Subset, CachedSolve, SubsetHash> cache;
    std::atomic<std::size_t> solves{0};

    Eigen::VectorXd densify(const CachedSolve& c) const {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Index>(fspec.dim()));
        for (auto [i, v] : c.x) x[static_cast<Index>(i)] = v;
        return x;
    }

    const CachedSolve* find(const Subset& a) const {
        std::shared_lock lock(mutex);
        auto it = cache.find(a);
        return it == cache.end() ? nullptr : &it->second;
    }

    CachedSolve solve(const Subset& a) const {
        std::optional<Eigen::VectorXd> warm;
        if (fspec.mode() == SignMode::nonnegative) {
            // Warm start from a cached immediate subset.
            auto idx = a.indices();
            for (auto it = idx.rbegin(); it != idx.rend() && !warm; ++it)
                if (auto* c = find(a.without(*it))) warm = densify(*c);
        }
        auto sol = solve_restricted_qp(fspec, a, tol, warm ? &*warm : nullptr);
        CachedSolve c{sol.value, {}, sol.iterations};
        for (Index i = 0; i < sol.x.size(); ++i)
            if (sol.x[i] != 0.0) c.x.emplace_back(static_cast<std::uint32_t>(i), sol.x[i]);
        return c;
    }

    const CachedSolve& get(const Subset& a) {
        if (auto* c = find(a)) return *c;
        CachedSolve fresh = solve(a);
        solves.fetch_add(1, std::memory_order_relaxed);
        std::unique_lock lock(mutex);
        // References into unordered_map stay valid across rehashing.
        return cache.try_emplace(a, std::move(fresh)).first->second;
    }
};

}  // namespace

struct CompositeFunction::State {
    std::shared_ptr<CompositeCore> core;
    SetFunction as_set;
};

CompositeFunction::CompositeFunction(QuadraticSpec fspec, SetFunction g, double qp_tol)
    : state_(std::make_shared<State>()) {
    if (!g.valid()) throw InvalidArgument("make_composite: uninitialized set function");
    if (g.ground_size() != fspec.dim())
        throw InvalidArgument("make_composite: g is over " + std::to_string(g.ground_size()) +
                              " elements but f has dimension " + std::to_string(fspec.dim()));
    if (!(qp_tol > 0.0)) throw InvalidArgument("make_composite: qp_tol must be positive");
    auto core = std::make_shared<CompositeCore>();
    core->fspec = std::move(fspec);
    core->g = std::move(g);
    core->tol = qp_tol;
    state_->core = core;
    state_->as_set = SetFunction(core->fspec.dim(), [core](const Subset& a) { return core->g(a) + core->get(a).value; });
}

std::size_t CompositeFunction::ground_size() const { return state_->core->fspec.dim(); }
const QuadraticSpec& CompositeFunction::fspec() const { return state_->core->fspec; }
const SetFunction& CompositeFunction::g() const { return state_->core->g; }

double CompositeFunction::eval_H(const Subset& a) const {
    if (a.ground_size() != ground_size()) throw InvalidArgument("eval_H: subset dimension mismatch");
    return state_->core->get(a).value;
}

InnerSolution CompositeFunction::solution(const Subset& a) const {
    if (a.ground_size() != ground_size()) throw InvalidArgument("recover_primal: subset dimension mismatch");
    const auto& c = state_->core->get(a);
    InnerSolution s;
    s.x = state_->core->densify(c);
    s.value = c.value;
    s.iterations = c.iterations;
    s.active_set = Subset(ground_size());
    for (auto i : a.indices())
        if (s.x[static_cast<Index>(i)] == 0.0 && fspec().mode() == SignMode::nonnegative) s.active_set.insert(i);
    return s;
}

double CompositeFunction::operator()(const Subset& a) const { return state_->as_set(a); }

const SetFunction& CompositeFunction::as_set_function() const { return state_->as_set; }

std::size_t CompositeFunction::qp_solves() const { return state_->core->solves.load(); }

CompositeFunction make_composite(QuadraticSpec fspec, SetFunction g, double qp_tol) {
    return CompositeFunction(std::move(fspec), std::move(g), qp_tol);
}

InnerSolution recover_primal(const CompositeFunction& comp, const Subset& a_star) {
    auto s = comp.solution(a_star);
    s.value = comp.fspec().value(s.x);
    return s;
}

Subset support_of(const Eigen::VectorXd& x) {
    Subset s(static_cast<std::size_t>(x.size()));
    for (Index i = 0; i < x.size(); ++i)
        if (x[i] != 0.0) s.insert(static_cast<std::size_t>(i));
    return s;
}

double combined_objective(const CompositeFunction& comp, const Eigen::VectorXd& x) {
    return comp.fspec().value(x) + comp.g()(support_of(x));
}

}  // namespace latsel
