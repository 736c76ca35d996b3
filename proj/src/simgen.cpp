#include "rpcr/simgen.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <tuple>

#include "rpcr/pc_basis.hpp"

namespace rpcr {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string_view to_string(SimModel model) { return model == SimModel::M1 ? "M1" : "M2"; }

std::string_view to_string(ErrorLaw law) {
    switch (law) {
    case ErrorLaw::Normal: return "normal";
    case ErrorLaw::T3Std: return "t3_std";
    case ErrorLaw::MixNormStd: return "mixnorm_std";
    }
    return "normal";
}

std::string_view to_string(Contamination contamination) {
    switch (contamination) {
    case Contamination::None: return "none";
    case Contamination::Indep: return "indep";
    case Contamination::ArCorr: return "ar_corr";
    }
    return "none";
}

SimModel parse_sim_model(std::string_view name) {
    if (name == "M1" || name == "m1" || name == "1") return SimModel::M1;
    if (name == "M2" || name == "m2" || name == "2") return SimModel::M2;
    throw std::invalid_argument("unknown model '" + std::string(name) + "' (expected M1 or M2)");
}

ErrorLaw parse_error_law(std::string_view name) {
    if (name == "normal") return ErrorLaw::Normal;
    if (name == "t3_std" || name == "t3") return ErrorLaw::T3Std;
    if (name == "mixnorm_std" || name == "mixnorm") return ErrorLaw::MixNormStd;
    throw std::invalid_argument("unknown error law '" + std::string(name) + "' (expected normal, t3_std or mixnorm_std)");
}

Contamination parse_contamination(std::string_view name) {
    if (name == "none") return Contamination::None;
    if (name == "indep") return Contamination::Indep;
    if (name == "ar_corr" || name == "ar") return Contamination::ArCorr;
    throw std::invalid_argument("unknown contamination '" + std::string(name) + "' (expected none, indep or ar_corr)");
}

std::pair<double, double> design_scales(SimModel model, Index n, Index p, double kappa) {
    const Index m = std::min(n, p);
    const double nd = static_cast<double>(n), pd = static_cast<double>(p);
    if (model == SimModel::M1) {
        if (m <= 7) throw std::invalid_argument("Model 1 needs min(n, p) > 7, got " + std::to_string(m));
        return {std::sqrt(0.9 * nd * pd / 7.0), std::sqrt(0.1 * nd * pd / static_cast<double>(m - 7))};
    }
    if (m < 6) throw std::invalid_argument("Model 2 needs min(n, p) >= 6, got " + std::to_string(m));
    if (!(kappa > 0.0)) throw std::invalid_argument("Model 2 needs kappa > 0");
    return {std::sqrt(kappa * pd), std::sqrt(2.0 * kappa * pd)};
}

VectorXd theta_star_for(SimModel model, Index m) {
    if (model == SimModel::M1) {
        if (m <= 7) throw std::invalid_argument("Model 1 needs m > 7");
        VectorXd t = VectorXd::Zero(m);
        t.head(7) << 0.483, 0.0, 0.029, 0.019, 0.0, 0.126, 0.009;
        return t;
    }
    if (m < 6) throw std::invalid_argument("Model 2 needs m >= 6");
    VectorXd t = VectorXd::Constant(m, 0.003);
    t.tail(6) << 0.009, 0.125, 0.003, 0.019, 0.029, 0.482;
    return t;
}

SimDesign gen_design(SimModel model, Index n, Index p, double kappa, Rng& rng) {
    SimDesign d;
    d.model = model;
    d.n = n;
    d.p = p;
    d.kappa = kappa;
    std::tie(d.a, d.b) = design_scales(model, n, p, kappa);
    const Index m = d.m();
    d.theta_star = theta_star_for(model, m);

    const MatrixXd M = rng.normal_matrix(n, p);
    const PCBasis svd = pc_basis(M);  // sign-fixed thin SVD, no centering
    d.U = svd.Utilde / std::sqrt(static_cast<double>(n));
    const MatrixXd& V = svd.loadings;

    VectorXd scale = VectorXd::Constant(m, d.b);
    if (model == SimModel::M1) scale.head(7).setConstant(d.a);
    else scale.tail(6).setConstant(d.a);
    d.X = d.U * scale.asDiagonal() * V.transpose();
    d.y_star = std::sqrt(static_cast<double>(n)) * (d.U * d.theta_star);
    return d;
}

double draw_error(ErrorLaw law, Rng& rng) {
    switch (law) {
    case ErrorLaw::Normal: return rng.normal();
    case ErrorLaw::T3Std: {
        const double z = rng.normal();
        double chi2 = 0.0;
        for (int k = 0; k < 3; ++k) {
            const double g = rng.normal();
            chi2 += g * g;
        }
        // t3 / sqrt(3) = z / sqrt(chi2)
        return z / std::sqrt(chi2);
    }
    case ErrorLaw::MixNormStd: {
        const bool wide = rng.uniform() < 0.1;
        const double e = (wide ? 10.0 : 1.0) * rng.normal();
        return e / std::sqrt(10.9);
    }
    }
    return 0.0;
}

MatrixXd draw_contamination(Contamination kind, Index n, Index p, Rng& rng) {
    MatrixXd W = MatrixXd::Zero(n, p);
    if (kind == Contamination::None) return W;
    if (kind == Contamination::Indep) return rng.normal_matrix(n, p);
    const double rho = 0.5;
    const double innov = std::sqrt(1.0 - rho * rho);
    for (Index i = 0; i < n; ++i) {
        W(i, 0) = rng.normal();
        for (Index j = 1; j < p; ++j) W(i, j) = rho * W(i, j - 1) + innov * rng.normal();
    }
    return W;
}

NoisyDraw gen_noise(const SimDesign& design, const NoiseSpec& spec, Rng& rng) {
    NoisyDraw out;
    out.y = design.y_star;
    for (Index i = 0; i < design.n; ++i) out.y(i) += draw_error(spec.error_law, rng);
    out.Z = design.X + draw_contamination(spec.contamination, design.n, design.p, rng);
    return out;
}

}  // namespace rpcr
