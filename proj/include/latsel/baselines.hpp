#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "latsel/inner.hpp"
#include "latsel/lattice.hpp"
#include "latsel/sfm.hpp"

namespace latsel {

struct PgdOptions {
    std::size_t max_iter = 100;
    /// Stop when best value - lower bound <= tol.
    double tol = 1e-4;
};

struct PgdResult {
    SfmResult result;
    std::vector<TraceRow> trace;
    /// Iterate whose sublevel sets produced the returned set.
    Eigen::VectorXd u_best;
};

/// Projected subgradient descent on the Lovász extension over [0,1]^n with
/// Polyak steps toward (best value - 1/(t+1)), started at 1/2. Every
/// iterate's superlevel sets are scored; the best one is returned. The
/// certificate uses the running average of the subgradients, a point of the
/// base polytope. The returned set is then shrunk one element at a time
/// while its value stays tied.
PgdResult pgd_lovasz_minimize(const SetFunction& f, const PgdOptions& opts = {});
PgdResult pgd_lovasz_minimize(const CompositeFunction& comp, const PgdOptions& opts = {});

struct DiscretizationGrid {
    std::size_t k = 51;
    Eigen::VectorXd box_lo;
    Eigen::VectorXd box_hi;

    /// Same bounds in every coordinate.
    static DiscretizationGrid uniform(std::size_t n, std::size_t k, double lo, double hi);
    /// Grid value j in {0, ..., k-1} of coordinate i: linspace(lo_i, hi_i, k).
    double value(std::size_t i, std::size_t j) const;
    void validate(std::size_t n) const;
};

struct FwOptions {
    std::size_t max_iter = 100;
    /// Stop when best value - dual lower bound <= tol.
    double tol = 1e-4;
    /// Refuse grids with n * k above this.
    std::size_t max_cells = 2'000'000;
};

struct FwResult {
    Eigen::VectorXd x;
    /// Grid index of each coordinate of x.
    std::vector<std::size_t> level;
    double value = 0.0;
    /// best value - lower bound from the current base-polytope point.
    double gap_certificate = 0.0;
    std::size_t iterations = 0;
    std::size_t active_vertices = 0;
    std::vector<TraceRow> trace;
};

/// Minimizes F(x) = f(x) + g(supp(x)) over the product grid by pairwise
/// Frank-Wolfe on the dual of min_ρ f_↓(ρ) + ||ρ||^2 / 2, ρ ranging over
/// per-coordinate nonincreasing sequences of length k-1. Every greedy walk
/// scores the k·n grid points it passes; the best one is returned.
FwResult discretized_fw_minimize(const QuadraticSpec& fspec, const SetFunction& g, const DiscretizationGrid& grid,
                                 const FwOptions& opts = {});

}  // namespace latsel
