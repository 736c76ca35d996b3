#include <doctest.h>

#include <cmath>

#include "rpcr/simgen.hpp"

using namespace rpcr;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_CASE("design scales") {
    const auto [a1, b1] = design_scales(SimModel::M1, 100, 500, 1.0);
    CHECK(a1 == doctest::Approx(80.178).epsilon(1e-4));
    CHECK(b1 == doctest::Approx(7.332).epsilon(1e-3));
    const auto [a2, b2] = design_scales(SimModel::M2, 100, 400, 1.0);
    CHECK(a2 == doctest::Approx(20.0));
    CHECK(b2 == doctest::Approx(28.284).epsilon(1e-4));
    CHECK_THROWS_AS(design_scales(SimModel::M1, 100, 7, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(design_scales(SimModel::M2, 5, 100, 1.0), std::invalid_argument);
    CHECK_NOTHROW(design_scales(SimModel::M2, 6, 100, 1.0));
}

TEST_CASE("true coefficients") {
    const VectorXd t1 = theta_star_for(SimModel::M1, 20);
    CHECK(t1(0) == 0.483);
    CHECK(t1(5) == 0.126);
    CHECK(t1.tail(13).cwiseAbs().maxCoeff() == 0.0);
    const VectorXd t2 = theta_star_for(SimModel::M2, 20);
    CHECK(t2(0) == 0.003);
    CHECK(t2(19) == 0.482);
    CHECK(t2(15) == 0.125);
}

TEST_CASE("generated designs have the two-level spectrum and the latent mean") {
    for (const SimModel model : {SimModel::M1, SimModel::M2}) {
        Rng rng(1, static_cast<std::uint64_t>(model));
        const SimDesign d = gen_design(model, 40, 60, 2.0, rng);
        const Eigen::JacobiSVD<MatrixXd> svd(d.X);
        const VectorXd s = svd.singularValues();
        for (int k = 0; k < 40; ++k) {
            const double v = s(k);
            CHECK((std::abs(v - d.a) <= 1e-8 * d.a || std::abs(v - d.b) <= 1e-8 * d.b));
        }
        CHECK((d.U.transpose() * d.U - MatrixXd::Identity(40, 40)).cwiseAbs().maxCoeff() < 1e-10);
        CHECK(d.y_star.squaredNorm() == doctest::Approx(40.0 * d.theta_star.squaredNorm()).epsilon(1e-8));
    }
}

TEST_CASE("Model 2 eigengap equals kappa") {
    Rng rng(2, 0);
    const double kappa = 1.0;
    const SimDesign d = gen_design(SimModel::M2, 50, 400, kappa, rng);
    const MatrixXd G = d.X * d.X.transpose() / 400.0;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(G);
    const VectorXd ev = es.eigenvalues();
    // active block eigenvalue a^2/p = kappa, inactive 2 kappa
    CHECK(ev.maxCoeff() - ev.minCoeff() == doctest::Approx(kappa).epsilon(1e-6));
}

TEST_CASE("no contamination leaves Z equal to X") {
    Rng rng(3, 0);
    const SimDesign d = gen_design(SimModel::M1, 30, 20, 1.0, rng);
    const NoisyDraw draw = gen_noise(d, {ErrorLaw::Normal, Contamination::None}, rng);
    CHECK(draw.Z == d.X);
}

TEST_CASE("error laws have unit variance") {
    for (const ErrorLaw law : {ErrorLaw::Normal, ErrorLaw::T3Std, ErrorLaw::MixNormStd}) {
        Rng rng(4, static_cast<std::uint64_t>(law));
        const int N = 1000000;
        double s = 0.0, ss = 0.0;
        for (int k = 0; k < N; ++k) {
            const double e = draw_error(law, rng);
            s += e;
            ss += e * e;
        }
        const double mean = s / N;
        const double var = ss / N - mean * mean;
        const double tol = law == ErrorLaw::MixNormStd ? 0.02 : 0.01;
        CHECK(var == doctest::Approx(1.0).epsilon(tol));
    }
}

TEST_CASE("AR(1) contamination has lag-one correlation 0.5") {
    Rng rng(5, 0);
    const MatrixXd W = draw_contamination(Contamination::ArCorr, 100000, 2, rng);
    const double r = (W.col(0).array() * W.col(1).array()).mean() /
                     std::sqrt(W.col(0).squaredNorm() / 1e5 * W.col(1).squaredNorm() / 1e5);
    CHECK(r == doctest::Approx(0.5).epsilon(0.04));
    CHECK(W.col(1).squaredNorm() / 1e5 == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("generation is reproducible per stream") {
    Rng a(9, 3), b(9, 3), c(9, 4);
    const SimDesign da = gen_design(SimModel::M1, 20, 30, 1.0, a);
    const SimDesign db = gen_design(SimModel::M1, 20, 30, 1.0, b);
    const SimDesign dc = gen_design(SimModel::M1, 20, 30, 1.0, c);
    CHECK(da.X == db.X);
    CHECK(da.X != dc.X);
    const NoisyDraw na = gen_noise(da, {ErrorLaw::T3Std, Contamination::Indep}, a);
    const NoisyDraw nb = gen_noise(db, {ErrorLaw::T3Std, Contamination::Indep}, b);
    CHECK(na.Z == nb.Z);
    CHECK(na.y == nb.y);
}

TEST_CASE("names parse") {
    CHECK(parse_sim_model("M2") == SimModel::M2);
    CHECK(parse_error_law("mixnorm_std") == ErrorLaw::MixNormStd);
    CHECK(parse_contamination("ar_corr") == Contamination::ArCorr);
    CHECK_THROWS_AS(parse_error_law("cauchy"), std::invalid_argument);
}
