#include "rpcr/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rpcr {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string_view to_string(Method method) {
    switch (method) {
    case Method::RPCR: return "RPCR";
    case Method::L1PCR: return "L1PCR";
    case Method::LASSO: return "LASSO";
    }
    return "RPCR";
}

Method parse_method(std::string_view name) {
    std::string s(name);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (s == "rpcr") return Method::RPCR;
    if (s == "l1pcr") return Method::L1PCR;
    if (s == "lasso") return Method::LASSO;
    throw std::invalid_argument("unknown method '" + std::string(name) + "' (expected rpcr, l1pcr or lasso)");
}

std::vector<Index> support_of(const VectorXd& theta, double tol) {
    std::vector<Index> s;
    for (Index j = 0; j < theta.size(); ++j)
        if (std::abs(theta(j)) > tol) s.push_back(j);
    return s;
}

namespace {

double median(VectorXd v) {
    if (v.size() == 0) return 0.0;
    std::sort(v.data(), v.data() + v.size());
    const Index h = v.size() / 2;
    return v.size() % 2 ? v(h) : 0.5 * (v(h - 1) + v(h));
}

FitResult fit_ls_lasso(Method tag, const Eigen::Ref<const VectorXd>& y, const Eigen::Ref<const MatrixXd>& design,
                       const LambdaRule& rule, std::vector<double> grid, const SolveOptions& opts) {
    if (y.size() != design.rows()) throw std::invalid_argument("lasso fit: design/response size mismatch");
    FitResult fit;
    fit.method = tag;
    fit.y_mean = y.mean();
    fit.x_mean = design.colwise().mean().transpose();
    const VectorXd yc = y.array() - fit.y_mean;
    const MatrixXd Xc = design.rowwise() - fit.x_mean.transpose();
    const double n = static_cast<double>(y.size());

    double lambda = 0.0;
    if (rule.fixed) {
        lambda = *rule.fixed;
    } else {
        if (grid.empty()) {
            double top = (Xc.transpose() * yc).cwiseAbs().maxCoeff() / n;
            if (!(top > 0.0)) top = 1e-8;
            grid = log_grid(top, rule.grid_ratio, rule.grid_size);
        }
        if (rule.cv_folds > y.size())
            throw std::invalid_argument("lasso fit: " + std::to_string(rule.cv_folds) + " folds for " +
                                        std::to_string(y.size()) + " observations");
        if (grid.size() == 1) {
            lambda = grid.front();
        } else {
            const LassoCvResult cv = cross_validate_lasso(yc, Xc, grid, rule.cv_folds, rule.rng_seed, opts);
            lambda = cv.lambdas[cv.best];
            fit.cv_lambdas = cv.lambdas;
            fit.cv_error = cv.cv_error;
        }
    }
    const SolveReport rep = solve_lasso_ls(yc, Xc, lambda, opts);
    fit.theta_hat = rep.theta_hat;
    fit.fitted_mean = Xc * fit.theta_hat;
    fit.intercept = (yc - fit.fitted_mean).mean();
    fit.support = support_of(fit.theta_hat);
    fit.lambdas = {lambda};
    fit.solver_reports = {rep};
    return fit;
}

}  // namespace

FitResult fit_rpcr_design(const Eigen::Ref<const VectorXd>& y, const Eigen::Ref<const MatrixXd>& design,
                          const RpcrConfig& cfg) {
    const RankProblem prob = make_rank_problem(y, design);
    const double a = cfg.penalty_a.value_or(default_penalty_a(cfg.family));
    PenaltySpec(cfg.family, a, 0.0);  // validates a

    FitResult fit;
    fit.method = Method::RPCR;
    fit.y_mean = y.mean();
    fit.x_mean = design.colwise().mean().transpose();

    const double lambda0 = calibrate_lambda0(prob.design, cfg.lambda0);
    const SolveReport stage1 = solve_weighted_rank_l1(prob, VectorXd::Constant(prob.m(), lambda0), cfg.solve);
    HbicResult sel = hbic_select(prob, stage1.theta_hat, cfg.family, a, cfg.hbic, cfg.solve);

    fit.theta_hat = sel.stage2.theta_hat;
    fit.fitted_mean = prob.design * fit.theta_hat;
    fit.intercept = median(prob.y - fit.fitted_mean);
    fit.support = support_of(fit.theta_hat);
    fit.lambdas = {lambda0, sel.lambda_hat};
    fit.solver_reports = {stage1, std::move(sel.stage2)};
    fit.hbic_trace = std::move(sel.trace);
    fit.hbic_refit = std::move(sel.refit);
    return fit;
}

FitResult fit_rpcr(const Dataset& data, const RpcrConfig& cfg, PCBasis* basis_out) {
    PCBasis basis = pc_basis(data);
    const VectorXd yc = data.y.array() - basis.y_mean;
    FitResult fit = fit_rpcr_design(yc, basis.Utilde, cfg);
    fit.y_mean = basis.y_mean;
    if (basis_out) *basis_out = std::move(basis);
    return fit;
}

FitResult fit_l1pcr_design(const Eigen::Ref<const VectorXd>& y, const Eigen::Ref<const MatrixXd>& design,
                           const LambdaRule& rule, const SolveOptions& opts) {
    return fit_ls_lasso(Method::L1PCR, y, design, rule, {}, opts);
}

FitResult fit_l1pcr(const Dataset& data, const LambdaRule& rule, const SolveOptions& opts, PCBasis* basis_out) {
    PCBasis basis = pc_basis(data);
    const VectorXd yc = data.y.array() - basis.y_mean;
    FitResult fit = fit_l1pcr_design(yc, basis.Utilde, rule, opts);
    fit.y_mean = basis.y_mean;
    if (basis_out) *basis_out = std::move(basis);
    return fit;
}

FitResult solve_lasso_raw(const Eigen::Ref<const MatrixXd>& Z, const Eigen::Ref<const VectorXd>& y,
                          std::vector<double> lambda_grid, int folds, std::uint64_t rng_seed, const SolveOptions& opts) {
    LambdaRule rule;
    rule.cv_folds = folds;
    rule.rng_seed = rng_seed;
    return fit_ls_lasso(Method::LASSO, y, Z, rule, std::move(lambda_grid), opts);
}

VectorXd predict_design(const FitResult& fit, const Eigen::Ref<const MatrixXd>& rows) {
    if (rows.cols() != fit.theta_hat.size())
        throw std::invalid_argument("predict: fit has " + std::to_string(fit.theta_hat.size()) + " coefficients, rows give " +
                                    std::to_string(rows.cols()));
    VectorXd out = (rows.rowwise() - fit.x_mean.transpose()) * fit.theta_hat;
    out.array() += fit.intercept + fit.y_mean;
    return out;
}

VectorXd predict(const FitResult& fit, const PCBasis& basis, const Eigen::Ref<const MatrixXd>& Z_new) {
    if (fit.method == Method::LASSO) return predict_design(fit, Z_new);
    return predict_design(fit, embed_rows(basis, Z_new));
}

}  // namespace rpcr
