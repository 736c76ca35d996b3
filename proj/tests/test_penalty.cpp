#include <doctest.h>

#include <cmath>

#include "rpcr/penalty.hpp"

using namespace rpcr;
using Eigen::VectorXd;

TEST_CASE("penalty values on each branch") {
    const PenaltySpec scad(PenaltyFamily::SCAD, 3.7, 1.0);
    CHECK(scad.value(0.5) == doctest::Approx(0.5));
    CHECK(scad.value(10.0) == doctest::Approx(2.35));
    const PenaltySpec mcp(PenaltyFamily::MCP, 3.0, 1.0);
    CHECK(mcp.value(3.0) == doctest::Approx(1.5));
    CHECK(mcp.value(7.0) == doctest::Approx(1.5));
    CHECK(mcp.value(1.5) == doctest::Approx(1.5 - 2.25 / 6.0));
}

TEST_CASE("penalty derivatives on each branch") {
    const PenaltySpec scad(PenaltyFamily::SCAD, 3.7, 1.0);
    CHECK(scad.deriv(0.5) == doctest::Approx(1.0));
    CHECK(scad.deriv(2.0) == doctest::Approx(0.6296296296).epsilon(1e-9));
    CHECK(scad.deriv(3.8) == 0.0);
    const PenaltySpec mcp(PenaltyFamily::MCP, 3.0, 1.0);
    CHECK(mcp.deriv(1.5) == doctest::Approx(0.5));
    CHECK(mcp.deriv(3.0) == 0.0);
}

TEST_CASE("invalid shape parameters are rejected") {
    CHECK_THROWS_AS(PenaltySpec(PenaltyFamily::SCAD, 2.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(PenaltySpec(PenaltyFamily::MCP, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(PenaltySpec(PenaltyFamily::MCP, 3.0, -1.0), std::invalid_argument);
    CHECK_NOTHROW(PenaltySpec(PenaltyFamily::SCAD, 2.01, 0.0));
    CHECK(parse_penalty_family("mcp") == PenaltyFamily::MCP);
    CHECK_THROWS_AS(parse_penalty_family("l0"), std::invalid_argument);
}

TEST_CASE("derivative is nonincreasing and vanishes exactly beyond a*lambda") {
    for (const auto family : {PenaltyFamily::SCAD, PenaltyFamily::MCP}) {
        const double a = default_penalty_a(family), lam = 0.8;
        const PenaltySpec spec(family, a, lam);
        double prev = spec.deriv(0.0);
        for (int k = 1; k <= 1000; ++k) {
            const double t = 5.0 * a * lam * k / 1000.0;
            const double d = spec.deriv(t);
            CHECK(d <= prev + 1e-15);
            prev = d;
            // zero strictly beyond a*lambda; positive strictly below it
            // (the exact boundary t = a*lambda is skipped: both formulas give 0 there)
            if (std::abs(t - a * lam) < 1e-9) continue;
            if (t > a * lam) CHECK(d == 0.0);
            else CHECK(d > 0.0);
        }
    }
}

TEST_CASE("numerical derivative of the value matches deriv away from kinks") {
    for (const auto family : {PenaltyFamily::SCAD, PenaltyFamily::MCP}) {
        const double a = default_penalty_a(family), lam = 1.3;
        const PenaltySpec spec(family, a, lam);
        for (int k = 0; k < 400; ++k) {
            const double t = 1e-3 + k * 0.0131;
            if (std::abs(t - lam) < 1e-3 || std::abs(t - a * lam) < 1e-3) continue;
            const double h = 1e-6;
            const double fd = (spec.value(t + h) - spec.value(t - h)) / (2 * h);
            CHECK(std::abs(fd - spec.deriv(t)) < 1e-6);
        }
    }
}

TEST_CASE("penalty values are continuous at the branch points") {
    for (const auto family : {PenaltyFamily::SCAD, PenaltyFamily::MCP}) {
        const double a = default_penalty_a(family), lam = 0.6;
        const PenaltySpec spec(family, a, lam);
        for (const double t : {lam, a * lam}) {
            CHECK(std::abs(spec.value(t - 1e-10) - spec.value(t + 1e-10)) < 1e-9);
        }
    }
}

TEST_CASE("adaptive weights") {
    const PenaltySpec mcp(PenaltyFamily::MCP, 3.0, 0.5);
    VectorXd pilot(4);
    pilot << 0.0, -2.0, 0.3, 1.4;
    const VectorXd w = adaptive_weights(mcp, pilot);
    CHECK(w(0) == doctest::Approx(0.5));
    CHECK(w(1) == 0.0);
    CHECK(w(2) == doctest::Approx(0.4));
    CHECK(w(3) == doctest::Approx(0.5 - 1.4 / 3.0));

    const PenaltySpec scad(PenaltyFamily::SCAD, 3.7, 0.5);
    CHECK(adaptive_weights(scad, pilot)(0) == doctest::Approx(0.5));
    CHECK(adaptive_weights(scad, pilot)(1) == 0.0);

    CHECK(adaptive_weights(mcp.with_lambda(0.0), pilot).cwiseAbs().maxCoeff() == 0.0);
    pilot(2) = std::nan("");
    CHECK_THROWS_AS(adaptive_weights(mcp, pilot), std::invalid_argument);
}
