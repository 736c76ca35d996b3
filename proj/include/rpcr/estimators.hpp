#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "rpcr/pc_basis.hpp"
#include "rpcr/penalty.hpp"
#include "rpcr/solver.hpp"
#include "rpcr/tuning.hpp"

namespace rpcr {

enum class Method { RPCR, L1PCR, LASSO };

std::string_view to_string(Method method);
Method parse_method(std::string_view name);

inline constexpr double kSupportTol = 1e-8;

struct FitResult {
    Method method = Method::RPCR;
    Eigen::VectorXd theta_hat;
    std::vector<Eigen::Index> support;   // |theta_j| > 1e-8
    Eigen::VectorXd fitted_mean;         // design * theta_hat, centered scale
    double intercept = 0.0;              // added to centered-scale predictions
    double y_mean = 0.0;                 // centering constant of the training response
    Eigen::VectorXd x_mean;              // LASSO only: column means of the raw training design
    std::vector<double> lambdas;         // RPCR: {lambda0, lambda_hat}; others: {lambda}

    // diagnostics
    std::vector<SolveReport> solver_reports;  // RPCR: stage 1, stage 2
    std::vector<HbicEntry> hbic_trace;
    Eigen::VectorXd hbic_refit;
    std::vector<double> cv_lambdas;
    std::vector<double> cv_error;
};

struct RpcrConfig {
    Lambda0Config lambda0;
    HbicConfig hbic;
    PenaltyFamily family = PenaltyFamily::MCP;
    std::optional<double> penalty_a;  // family default when unset
    SolveOptions solve;
};

struct LambdaRule {
    std::optional<double> fixed;  // fixed lambda; otherwise k-fold CV
    int cv_folds = 10;
    int grid_size = 50;
    double grid_ratio = 0.01;
    std::uint64_t rng_seed = 0;
};

/// Two-stage rank regression on a centered response and design (typically
/// Utilde): lambda0 calibration, rank-lasso pilot, adaptive MCP/SCAD weights,
/// HBIC over the stage-2 grid. Intercept is the median stage-2 residual.
/// Solver non-convergence is reported through `solver_reports`, never thrown.
FitResult fit_rpcr_design(const Eigen::Ref<const Eigen::VectorXd>& y, const Eigen::Ref<const Eigen::MatrixXd>& design,
                          const RpcrConfig& cfg);

/// Center, build the PC basis, then fit_rpcr_design on Utilde.
FitResult fit_rpcr(const Dataset& data, const RpcrConfig& cfg, PCBasis* basis_out = nullptr);

/// Least-squares lasso on a design (orthogonal fast path on Utilde), lambda by
/// k-fold CV over a log grid from ||X^T y||_inf / n, or fixed.
FitResult fit_l1pcr_design(const Eigen::Ref<const Eigen::VectorXd>& y, const Eigen::Ref<const Eigen::MatrixXd>& design,
                           const LambdaRule& rule, const SolveOptions& opts = {});

FitResult fit_l1pcr(const Dataset& data, const LambdaRule& rule, const SolveOptions& opts = {},
                    PCBasis* basis_out = nullptr);

/// Lasso fitted directly on the raw (contaminated) predictors with CV over
/// `lambda_grid` (empty = default grid).
FitResult solve_lasso_raw(const Eigen::Ref<const Eigen::MatrixXd>& Z, const Eigen::Ref<const Eigen::VectorXd>& y,
                          std::vector<double> lambda_grid, int folds, std::uint64_t rng_seed,
                          const SolveOptions& opts = {});

/// PC-space methods: embed each row of Z_new and add intercept + y_mean.
/// LASSO fits: (z - x_mean)^T theta + intercept + y_mean.
Eigen::VectorXd predict(const FitResult& fit, const PCBasis& basis, const Eigen::Ref<const Eigen::MatrixXd>& Z_new);

/// Prediction from rows already expressed in the fit's design coordinates.
Eigen::VectorXd predict_design(const FitResult& fit, const Eigen::Ref<const Eigen::MatrixXd>& rows);

std::vector<Eigen::Index> support_of(const Eigen::VectorXd& theta, double tol = kSupportTol);

}  // namespace rpcr
