#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "rpcr/penalty.hpp"
#include "rpcr/rank_loss.hpp"
#include "rpcr/solver.hpp"

namespace rpcr {

struct Lambda0Config {
    double c = 1.01;        // multiplier, > 1
    double alpha0 = 0.10;   // upper-tail level
    int draws = 500;        // simulated scores, >= 100
    std::uint64_t rng_seed = 0;

    void validate() const;
};

struct Lambda0Diagnostics {
    double lambda0 = 0.0;
    double quantile = 0.0;             // empirical (1 - alpha0) quantile of ||S||_inf
    std::vector<double> sup_norms;     // one per draw, in draw order
};

/// c times the ceil((1 - alpha0) B)-th order statistic of ||S_sim||_inf over
/// B permutation-simulated scores of `design`.
Lambda0Diagnostics calibrate_lambda0_detailed(const Eigen::Ref<const Eigen::MatrixXd>& design, const Lambda0Config& cfg);
double calibrate_lambda0(const Eigen::Ref<const Eigen::MatrixXd>& design, const Lambda0Config& cfg);

/// Default stage-2 grid: `count` log-spaced values from ||S_n(0)||_inf down
/// to `ratio` times that.
std::vector<double> default_lambda_grid(const RankProblem& prob, int count = 30, double ratio = 0.01);

struct HbicConfig {
    std::vector<double> grid;  // strictly decreasing, positive; empty = default grid
    int grid_size = 30;        // default grid only
    double grid_ratio = 0.01;  // default grid only
    double support_tol = 1e-8;
    // Largest support eligible for selection; 0 = floor(n / log n). Larger
    // supports approach interpolation, where the refit loss collapses to 0.
    int max_support = 0;

    void validate() const;
};

struct HbicEntry {
    double lambda = 0.0;
    std::size_t support_size = 0;
    double refit_loss = 0.0;
    double log_loss = 0.0;     // -inf when refit_loss == 0
    double complexity = 0.0;   // |A| log(log n) / n * log m
    double hbic = 0.0;         // +inf when not eligible
    bool eligible = true;      // support within the model-size cap
};

struct HbicResult {
    double lambda_hat = 0.0;
    std::size_t best = 0;
    SolveReport stage2;                 // penalized fit at lambda_hat
    Eigen::VectorXd refit;              // support-restricted unpenalized refit at lambda_hat
    std::vector<HbicEntry> trace;
};

double hbic_complexity(std::size_t support_size, Eigen::Index n, Eigen::Index m);

/// Model-size cap used when HbicConfig::max_support is 0.
std::size_t hbic_default_max_support(Eigen::Index n);

/// Stage-2 selection over the grid: adaptive weights from `pilot`, weighted
/// rank solve, support refit, HBIC over supports within the size cap. Ties go
/// to the larger lambda; if no support is eligible the largest lambda wins.
HbicResult hbic_select(const RankProblem& prob, const Eigen::VectorXd& pilot, PenaltyFamily family, double a,
                       const HbicConfig& cfg, const SolveOptions& opts = {});

}  // namespace rpcr
