#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace rpcr {

enum class PenaltyFamily { SCAD, MCP };

inline std::string_view to_string(PenaltyFamily family) { return family == PenaltyFamily::SCAD ? "scad" : "mcp"; }

inline PenaltyFamily parse_penalty_family(std::string_view name) {
    if (name == "scad" || name == "SCAD") return PenaltyFamily::SCAD;
    if (name == "mcp" || name == "MCP") return PenaltyFamily::MCP;
    throw std::invalid_argument("unknown penalty family '" + std::string(name) + "' (expected scad or mcp)");
}

inline double default_penalty_a(PenaltyFamily family) { return family == PenaltyFamily::SCAD ? 3.7 : 3.0; }

/// Folded-concave penalty p_lambda(t) with shape parameter a.
/// SCAD needs a > 2, MCP needs a > 1, lambda >= 0.
class PenaltySpec {
public:
    PenaltySpec(PenaltyFamily family, double a, double lambda) : family_(family), a_(a), lambda_(lambda) {
        if (!(lambda >= 0.0) || !std::isfinite(lambda))
            throw std::invalid_argument("penalty: lambda must be finite and >= 0");
        if (family == PenaltyFamily::SCAD && !(a > 2.0))
            throw std::invalid_argument("penalty: SCAD requires a > 2, got " + std::to_string(a));
        if (family == PenaltyFamily::MCP && !(a > 1.0))
            throw std::invalid_argument("penalty: MCP requires a > 1, got " + std::to_string(a));
    }

    PenaltyFamily family() const { return family_; }
    double a() const { return a_; }
    double lambda() const { return lambda_; }

    PenaltySpec with_lambda(double lambda) const { return {family_, a_, lambda}; }

    template <typename Scalar>
    Scalar value(Scalar t) const {
        if (t < Scalar(0)) throw std::invalid_argument("penalty: value needs t >= 0");
        const Scalar lam(lambda_), a(a_);
        if (family_ == PenaltyFamily::SCAD) {
            if (t < lam) return lam * t;
            if (t <= a * lam) return (a * lam * t - (t * t + lam * lam) / Scalar(2)) / (a - Scalar(1));
            return (a + Scalar(1)) * lam * lam / Scalar(2);
        }
        if (t < a * lam) return lam * (t - t * t / (Scalar(2) * a * lam));
        return a * lam * lam / Scalar(2);
    }

    /// Derivative on t > 0. At t = 0 the right limit (lambda) is returned.
    template <typename Scalar>
    Scalar deriv(Scalar t) const {
        if (t < Scalar(0)) throw std::invalid_argument("penalty: deriv needs t >= 0");
        const Scalar lam(lambda_), a(a_);
        if (family_ == PenaltyFamily::SCAD) {
            if (t <= lam) return lam;
            return std::max(a * lam - t, Scalar(0)) / (a - Scalar(1));
        }
        return std::max(lam - t / a, Scalar(0));
    }

private:
    PenaltyFamily family_;
    double a_;
    double lambda_;
};

/// Local-linear-approximation weights w_j = p'_lambda(|pilot_j|).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> adaptive_weights(const PenaltySpec& spec,
                                                                           const Eigen::MatrixBase<Derived>& pilot) {
    using Scalar = typename Derived::Scalar;
    if (!pilot.allFinite()) throw std::invalid_argument("adaptive_weights: non-finite pilot");
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> w(pilot.size());
    for (Eigen::Index j = 0; j < pilot.size(); ++j) w(j) = spec.deriv(std::abs(pilot(j)));
    return w;
}

}  // namespace rpcr
