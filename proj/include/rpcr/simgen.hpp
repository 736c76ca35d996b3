#pragma once

#include <cstdint>
#include <string_view>

#include <Eigen/Dense>

#include "rpcr/rng.hpp"

namespace rpcr {

enum class SimModel { M1, M2 };
enum class ErrorLaw { Normal, T3Std, MixNormStd };
enum class Contamination { None, Indep, ArCorr };

std::string_view to_string(SimModel model);
std::string_view to_string(ErrorLaw law);
std::string_view to_string(Contamination contamination);
SimModel parse_sim_model(std::string_view name);
ErrorLaw parse_error_law(std::string_view name);
Contamination parse_contamination(std::string_view name);

/// Latent design with a two-level spectrum on the singular vectors of a
/// Gaussian matrix, plus the latent mean y* = sqrt(n) U theta*.
struct SimDesign {
    SimModel model = SimModel::M1;
    Eigen::Index n = 0;
    Eigen::Index p = 0;
    double kappa = 1.0;
    double a = 0.0;  // singular value on the active block
    double b = 0.0;  // singular value elsewhere
    Eigen::VectorXd theta_star;  // length m
    Eigen::MatrixXd X;           // n x p
    Eigen::MatrixXd U;           // n x m
    Eigen::VectorXd y_star;      // length n

    Eigen::Index m() const { return std::min(n, p); }
};

/// Model 1: A = first 7 components, a = sqrt(0.9 np/7), b = sqrt(0.1 np/(m-7)).
/// Model 2: A = last 6 components, a = sqrt(kappa p), b = sqrt(2 kappa p).
/// Throws std::invalid_argument when m is too small for the active block.
SimDesign gen_design(SimModel model, Eigen::Index n, Eigen::Index p, double kappa, Rng& rng);

/// Active-block singular values (a, b) for a model, without drawing anything.
std::pair<double, double> design_scales(SimModel model, Eigen::Index n, Eigen::Index p, double kappa);

Eigen::VectorXd theta_star_for(SimModel model, Eigen::Index m);

/// One draw from the unit-variance error law.
double draw_error(ErrorLaw law, Rng& rng);

/// n x p contamination matrix: rows N(0, I), rows N(0, Sigma) with
/// Sigma_ij = 0.5^|i-j| (AR(1) recursion), or zero.
Eigen::MatrixXd draw_contamination(Contamination kind, Eigen::Index n, Eigen::Index p, Rng& rng);

struct NoiseSpec {
    ErrorLaw error_law = ErrorLaw::Normal;
    Contamination contamination = Contamination::None;
};

struct NoisyDraw {
    Eigen::MatrixXd Z;
    Eigen::VectorXd y;
};

/// y = y* + eps, Z = X + W. Errors are drawn before contamination.
NoisyDraw gen_noise(const SimDesign& design, const NoiseSpec& spec, Rng& rng);

}  // namespace rpcr
