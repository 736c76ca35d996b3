#include "rpcr/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>

namespace rpcr {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

void Lambda0Config::validate() const {
    if (!(c > 1.0)) throw std::invalid_argument("lambda0: c must exceed 1");
    if (!(alpha0 > 0.0 && alpha0 < 1.0)) throw std::invalid_argument("lambda0: alpha0 must lie in (0, 1)");
    if (draws < 100) throw std::invalid_argument("lambda0: need at least 100 draws");
}

Lambda0Diagnostics calibrate_lambda0_detailed(const Eigen::Ref<const MatrixXd>& design, const Lambda0Config& cfg) {
    cfg.validate();
    if (design.rows() < 2) throw std::invalid_argument("lambda0: need at least two rows");
    Rng rng(cfg.rng_seed, 0x1A0);
    Lambda0Diagnostics out;
    out.sup_norms.reserve(static_cast<std::size_t>(cfg.draws));
    const MatrixXd X = design;
    for (int b = 0; b < cfg.draws; ++b) {
        const VectorXd s = simulated_score(X, rng);
        out.sup_norms.push_back(s.size() ? s.cwiseAbs().maxCoeff() : 0.0);
    }
    std::vector<double> sorted = out.sup_norms;
    std::sort(sorted.begin(), sorted.end());
    const auto rank = static_cast<std::size_t>(std::ceil((1.0 - cfg.alpha0) * static_cast<double>(cfg.draws)));
    out.quantile = sorted[std::clamp<std::size_t>(rank, 1, sorted.size()) - 1];
    out.lambda0 = cfg.c * out.quantile;
    return out;
}

double calibrate_lambda0(const Eigen::Ref<const MatrixXd>& design, const Lambda0Config& cfg) {
    return calibrate_lambda0_detailed(design, cfg).lambda0;
}

std::vector<double> default_lambda_grid(const RankProblem& prob, int count, double ratio) {
    const VectorXd s0 = rank_score(VectorXd::Zero(prob.m()), prob);
    double top = s0.size() ? s0.cwiseAbs().maxCoeff() : 0.0;
    if (!(top > 0.0)) top = 1e-8;
    return log_grid(top, ratio, count);
}

void HbicConfig::validate() const {
    if (max_support < 0) throw std::invalid_argument("hbic: max_support must be >= 0");
    if (grid_size < 1) throw std::invalid_argument("hbic: grid_size must be >= 1");
    if (!(grid_ratio > 0.0 && grid_ratio < 1.0)) throw std::invalid_argument("hbic: grid_ratio must lie in (0, 1)");
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (!(grid[k] > 0.0) || !std::isfinite(grid[k])) throw std::invalid_argument("hbic: grid values must be positive");
        if (k > 0 && !(grid[k] < grid[k - 1])) throw std::invalid_argument("hbic: grid must be strictly decreasing");
    }
}

double hbic_complexity(std::size_t support_size, Index n, Index m) {
    const double nd = static_cast<double>(n);
    return static_cast<double>(support_size) * std::log(std::log(nd)) / nd * std::log(static_cast<double>(m));
}

std::size_t hbic_default_max_support(Index n) {
    if (n < 3) return 1;
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(static_cast<double>(n) / std::log(static_cast<double>(n)))));
}

HbicResult hbic_select(const RankProblem& prob, const VectorXd& pilot, PenaltyFamily family, double a,
                       const HbicConfig& cfg, const SolveOptions& opts) {
    cfg.validate();
    const Index m = prob.m();
    if (pilot.size() != m) throw std::invalid_argument("hbic: pilot length differs from column count");
    const std::vector<double> grid = cfg.grid.empty() ? default_lambda_grid(prob, cfg.grid_size, cfg.grid_ratio) : cfg.grid;

    const std::size_t cap =
        cfg.max_support > 0 ? static_cast<std::size_t>(cfg.max_support) : hbic_default_max_support(prob.n());

    HbicResult out;
    std::vector<SolveReport> fits;
    std::vector<VectorXd> refits;
    // identical supports share one refit
    std::map<std::vector<bool>, std::pair<VectorXd, double>> refit_cache;

    for (const double lambda : grid) {
        const PenaltySpec spec(family, a, lambda);
        const VectorXd w = adaptive_weights(spec, pilot);
        SolveOptions stage_opts = opts;
        stage_opts.fixed_zero_mask.reset();
        SolveReport fit = solve_weighted_rank_l1(prob, w, stage_opts);

        std::vector<bool> off(static_cast<std::size_t>(m));
        std::size_t support = 0;
        for (Index j = 0; j < m; ++j) {
            off[static_cast<std::size_t>(j)] = !(std::abs(fit.theta_hat(j)) > cfg.support_tol);
            support += off[static_cast<std::size_t>(j)] ? 0 : 1;
        }

        HbicEntry e;
        e.lambda = lambda;
        e.support_size = support;
        e.complexity = hbic_complexity(support, prob.n(), m);
        if (support > cap) {
            // saturated: no refit, never selected
            e.eligible = false;
            e.refit_loss = std::numeric_limits<double>::quiet_NaN();
            e.log_loss = std::numeric_limits<double>::quiet_NaN();
            e.hbic = std::numeric_limits<double>::infinity();
            out.trace.push_back(e);
            fits.push_back(std::move(fit));
            refits.push_back(VectorXd());
            continue;
        }

        auto it = refit_cache.find(off);
        if (it == refit_cache.end()) {
            SolveOptions refit_opts = opts;
            refit_opts.fixed_zero_mask = off;
            const SolveReport refit = solve_weighted_rank_l1(prob, VectorXd::Zero(m), refit_opts);
            it = refit_cache.emplace(off, std::make_pair(refit.theta_hat, rank_loss_fast(refit.theta_hat, prob))).first;
        }

        e.refit_loss = it->second.second;
        e.log_loss = e.refit_loss > 0.0 ? std::log(e.refit_loss) : -std::numeric_limits<double>::infinity();
        e.hbic = e.log_loss + e.complexity;
        out.trace.push_back(e);
        fits.push_back(std::move(fit));
        refits.push_back(it->second.first);
    }

    for (std::size_t k = 1; k < out.trace.size(); ++k)
        if (out.trace[k].hbic <= out.trace[out.best].hbic) out.best = k;
    if (!out.trace[out.best].eligible) {
        // every support exceeded the cap: refit at the largest lambda anyway
        SolveOptions refit_opts = opts;
        std::vector<bool> off(static_cast<std::size_t>(m));
        for (Index j = 0; j < m; ++j) off[static_cast<std::size_t>(j)] = !(std::abs(fits[0].theta_hat(j)) > cfg.support_tol);
        refit_opts.fixed_zero_mask = off;
        refits[0] = solve_weighted_rank_l1(prob, VectorXd::Zero(m), refit_opts).theta_hat;
        out.best = 0;
    }
    out.lambda_hat = out.trace[out.best].lambda;
    out.stage2 = std::move(fits[out.best]);
    out.refit = std::move(refits[out.best]);
    return out;
}

}  // namespace rpcr
