#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "rpcr/rng.hpp"
#include "rpcr/solver.hpp"

namespace rpcr {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

double lasso_objective(const Eigen::Ref<const VectorXd>& y, const Eigen::Ref<const MatrixXd>& X, double lambda,
                       const VectorXd& theta) {
    const double n = static_cast<double>(y.size());
    return (y - X * theta).squaredNorm() / (2.0 * n) + lambda * theta.lpNorm<1>();
}

// max_j distance of -X_j^T r / n from lambda * d|theta_j|
double kkt_residual(const Eigen::Ref<const MatrixXd>& X, const VectorXd& resid, double lambda, const VectorXd& theta) {
    const double n = static_cast<double>(resid.size());
    const VectorXd corr = X.transpose() * resid / n;
    double worst = 0.0;
    for (Index j = 0; j < theta.size(); ++j) {
        const double v = theta(j) != 0.0 ? std::abs(corr(j) - lambda * (theta(j) > 0.0 ? 1.0 : -1.0))
                                         : std::max(0.0, std::abs(corr(j)) - lambda);
        worst = std::max(worst, v);
    }
    return worst;
}

}  // namespace

SolveReport solve_lasso_ls(const Eigen::Ref<const VectorXd>& y, const Eigen::Ref<const MatrixXd>& X, double lambda,
                           const SolveOptions& opts, const VectorXd* warm_start) {
    const Index n = X.rows();
    const Index m = X.cols();
    if (y.size() != n) throw std::invalid_argument("solve_lasso_ls: design/response size mismatch");
    if (!(lambda >= 0.0)) throw std::invalid_argument("solve_lasso_ls: lambda must be >= 0");
    if (warm_start && warm_start->size() != m) throw std::invalid_argument("solve_lasso_ls: warm start length mismatch");
    const double nd = static_cast<double>(n);

    SolveReport report;
    report.method = RankSolverMethod::Lp;  // unused for least squares

    const MatrixXd gram = X.transpose() * X;
    const bool orthogonal = (gram - nd * MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff() <= 1e-6 * nd;
    if (orthogonal) {
        const VectorXd corr = X.transpose() * y / nd;
        report.theta_hat = corr.unaryExpr([lambda](double c) { return soft_threshold(c, lambda); });
        report.iterations = 1;
    } else {
        VectorXd theta = warm_start ? *warm_start : VectorXd::Zero(m);
        VectorXd resid = y - X * theta;
        const VectorXd colsq = gram.diagonal();
        int it = 0;
        for (; it < opts.max_iters; ++it) {
            double max_change = 0.0;
            for (Index j = 0; j < m; ++j) {
                if (colsq(j) <= 0.0) {
                    theta(j) = 0.0;
                    continue;
                }
                const double old = theta(j);
                const double rho = X.col(j).dot(resid) / nd + colsq(j) / nd * old;
                const double updated = soft_threshold(rho, lambda) / (colsq(j) / nd);
                if (updated != old) {
                    resid -= (updated - old) * X.col(j);
                    theta(j) = updated;
                    max_change = std::max(max_change, std::abs(updated - old) * std::sqrt(colsq(j) / nd));
                }
            }
            if (max_change <= 1e-3 * opts.obj_tol &&
                kkt_residual(X, resid, lambda, theta) <= opts.obj_tol * std::max(1.0, lambda)) {
                ++it;
                report.converged = true;
                break;
            }
        }
        report.theta_hat = theta;
        report.iterations = it;
    }
    const VectorXd resid = y - X * report.theta_hat;
    report.certificate_gap = kkt_residual(X, resid, lambda, report.theta_hat);
    report.objective = lasso_objective(y, X, lambda, report.theta_hat);
    if (orthogonal) report.converged = true;
    return report;
}

std::vector<double> log_grid(double hi, double ratio, int count) {
    if (count < 1) throw std::invalid_argument("log_grid: count must be >= 1");
    if (!(hi > 0.0) || !(ratio > 0.0) || !(ratio <= 1.0)) throw std::invalid_argument("log_grid: need hi > 0, 0 < ratio <= 1");
    std::vector<double> grid(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        const double frac = count == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(count - 1);
        grid[static_cast<std::size_t>(k)] = hi * std::pow(ratio, frac);
    }
    return grid;
}

std::vector<int> assign_folds(Index n, int folds, std::uint64_t rng_seed) {
    if (folds < 2) throw std::invalid_argument("assign_folds: need at least 2 folds");
    if (folds > n) throw std::invalid_argument("assign_folds: more folds than observations");
    Rng rng(rng_seed, 0xF01D);
    const std::vector<int> perm = rng.permutation(static_cast<int>(n));
    std::vector<int> label(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) label[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)] - 1)] = static_cast<int>(i % folds);
    return label;
}

LassoCvResult cross_validate_lasso(const Eigen::Ref<const VectorXd>& y, const Eigen::Ref<const MatrixXd>& X,
                                   const std::vector<double>& lambdas, int folds, std::uint64_t rng_seed,
                                   const SolveOptions& opts) {
    if (lambdas.empty()) throw std::invalid_argument("cross_validate_lasso: empty lambda grid");
    const Index n = X.rows();
    const std::vector<int> label = assign_folds(n, folds, rng_seed);

    LassoCvResult out;
    out.lambdas = lambdas;
    out.cv_error.assign(lambdas.size(), 0.0);
    for (int f = 0; f < folds; ++f) {
        std::vector<Index> train, test;
        for (Index i = 0; i < n; ++i) (label[static_cast<std::size_t>(i)] == f ? test : train).push_back(i);
        MatrixXd Xtr(static_cast<Index>(train.size()), X.cols());
        VectorXd ytr(Xtr.rows());
        for (Index r = 0; r < Xtr.rows(); ++r) {
            Xtr.row(r) = X.row(train[static_cast<std::size_t>(r)]);
            ytr(r) = y(train[static_cast<std::size_t>(r)]);
        }
        const Eigen::RowVectorXd xmean = Xtr.colwise().mean();
        const double ymean = ytr.mean();
        Xtr.rowwise() -= xmean;
        ytr.array() -= ymean;

        VectorXd warm = VectorXd::Zero(X.cols());
        for (std::size_t l = 0; l < lambdas.size(); ++l) {
            const SolveReport fit = solve_lasso_ls(ytr, Xtr, lambdas[l], opts, &warm);
            warm = fit.theta_hat;
            double sse = 0.0;
            for (const Index i : test) {
                const double pred = ymean + (X.row(i) - xmean).dot(fit.theta_hat);
                sse += (y(i) - pred) * (y(i) - pred);
            }
            out.cv_error[l] += sse;
        }
    }
    for (double& e : out.cv_error) e /= static_cast<double>(n);
    // first minimum on a decreasing grid = largest lambda among ties
    out.best = static_cast<std::size_t>(std::min_element(out.cv_error.begin(), out.cv_error.end()) - out.cv_error.begin());
    return out;
}

}  // namespace rpcr
