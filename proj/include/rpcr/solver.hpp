#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "rpcr/rank_loss.hpp"

namespace rpcr {

enum class RankSolverMethod {
    Lp,                  // primal-dual interior point on the pairwise LAD linear program
    SmoothedFirstOrder,  // Huber continuation with accelerated proximal gradient
    Auto,                // Lp for n <= 200, smoothed otherwise
};

std::string_view to_string(RankSolverMethod method);
RankSolverMethod parse_rank_solver_method(std::string_view name);

struct SolveOptions {
    double obj_tol = 1e-6;
    int max_iters = 20000;
    std::uint64_t rng_seed = 0;
    // true = coordinate forced to zero
    std::optional<std::vector<bool>> fixed_zero_mask;
    RankSolverMethod method = RankSolverMethod::Auto;
};

struct SolveReport {
    Eigen::VectorXd theta_hat;
    double objective = 0.0;         // loss(theta_hat) + sum_j w_j |theta_j|
    double certificate_gap = 0.0;   // objective minus a certified lower bound on the optimum
    int iterations = 0;
    bool converged = false;
    RankSolverMethod method = RankSolverMethod::Lp;
};

/// Minimizes Q_n(theta) + sum_j w_j |theta_j| for the pairwise rank loss.
///
/// The returned certificate_gap is a duality gap: the lower bound comes from
/// an explicitly constructed feasible point of the dual LP
///   max sum_{i<j} z_ij (y_i - y_j)
///   s.t. sum_{i<j} z_ij (x_i - x_j) + v = 0, |z_ij| <= 2/(n(n-1)), |v_j| <= w_j,
/// so converged = true means objective <= optimum + obj_tol * max(1, objective).
/// Throws std::invalid_argument on negative or non-finite weights.
SolveReport solve_weighted_rank_l1(const RankProblem& prob, const Eigen::VectorXd& weights,
                                   const SolveOptions& opts = {});

/// Weighted objective Q_n(theta) + sum_j w_j |theta_j| via the sorted path.
double weighted_rank_objective(const RankProblem& prob, const Eigen::VectorXd& weights, const Eigen::VectorXd& theta);

/// Lower bound on the weighted rank objective from a candidate pair dual
/// (length n(n-1)/2, ordered (0,1), (0,2), ..., (1,2), ...). The candidate is
/// projected onto the equality constraints of unpenalized coordinates and
/// scaled into the box, so any input yields a valid bound.
double rank_dual_bound(const RankProblem& prob, const Eigen::VectorXd& weights, const Eigen::VectorXd& pair_dual);

/// Squared-loss lasso (1/(2n))||y - X theta||^2 + lambda ||theta||_1.
/// Uses closed-form soft thresholding when X^T X = n I (within 1e-6 n),
/// cyclic coordinate descent otherwise. `warm_start` seeds coordinate descent.
SolveReport solve_lasso_ls(const Eigen::Ref<const Eigen::VectorXd>& y, const Eigen::Ref<const Eigen::MatrixXd>& design,
                           double lambda, const SolveOptions& opts = {},
                           const Eigen::VectorXd* warm_start = nullptr);

inline double soft_threshold(double value, double threshold) {
    if (value > threshold) return value - threshold;
    if (value < -threshold) return value + threshold;
    return 0.0;
}

/// Log-spaced decreasing grid from hi to hi * ratio (count >= 1).
std::vector<double> log_grid(double hi, double ratio, int count);

struct LassoCvResult {
    std::vector<double> lambdas;
    std::vector<double> cv_error;  // mean held-out squared error per lambda
    std::size_t best = 0;
};

/// K-fold cross-validation of solve_lasso_ls over `lambdas`. Folds are a
/// seeded random partition of the rows; each training fold is re-centered
/// before fitting and held-out rows are predicted with that fold's intercept.
LassoCvResult cross_validate_lasso(const Eigen::Ref<const Eigen::VectorXd>& y,
                                   const Eigen::Ref<const Eigen::MatrixXd>& design, const std::vector<double>& lambdas,
                                   int folds, std::uint64_t rng_seed, const SolveOptions& opts = {});

/// Fold label (0..folds-1) per row: balanced sizes, seeded shuffle.
std::vector<int> assign_folds(Eigen::Index n, int folds, std::uint64_t rng_seed);

}  // namespace rpcr
