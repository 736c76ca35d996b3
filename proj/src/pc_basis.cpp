#include "rpcr/pc_basis.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace rpcr {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

void validate(const Dataset& data) {
    if (data.Z.rows() != data.y.size())
        throw std::invalid_argument("dataset: Z has " + std::to_string(data.Z.rows()) +
                                    " rows but y has " + std::to_string(data.y.size()) + " entries");
    if (data.n() < 3)
        throw std::invalid_argument("dataset: need at least 3 observations, got " +
                                    std::to_string(data.n()));
    if (data.p() < 1) throw std::invalid_argument("dataset: need at least one predictor");
    if (!data.Z.allFinite() || !data.y.allFinite())
        throw std::invalid_argument("dataset: non-finite entries");
}

CenteredDataset center_dataset(const Dataset& raw) {
    validate(raw);
    CenteredDataset out;
    out.centering.col_means = raw.Z.colwise().mean().transpose();
    out.centering.y_mean = raw.y.mean();
    out.data.Z = raw.Z.rowwise() - out.centering.col_means.transpose();
    out.data.y = raw.y.array() - out.centering.y_mean;
    return out;
}

namespace {

// Flip so the largest-|entry| of column k of U is positive; mirror on V.
void fix_signs(MatrixXd& U, MatrixXd& V) {
    for (Index k = 0; k < U.cols(); ++k) {
        Index arg = 0;
        double best = -1.0;
        for (Index i = 0; i < U.rows(); ++i) {
            const double a = std::abs(U(i, k));
            if (a > best) {
                best = a;
                arg = i;
            }
        }
        if (U(arg, k) < 0.0) {
            U.col(k) = -U.col(k);
            V.col(k) = -V.col(k);
        }
    }
}

}  // namespace

PCBasis pc_basis(const MatrixXd& Z) {
    const Index n = Z.rows();
    const Index p = Z.cols();
    if (n < 1 || p < 1) throw std::invalid_argument("pc_basis: empty matrix");
    if (!Z.allFinite()) throw std::invalid_argument("pc_basis: non-finite entries");
    const Index m = std::min(n, p);

    Eigen::BDCSVD<MatrixXd> svd(Z, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success)
        throw std::runtime_error("pc_basis: SVD failed to converge on a " + std::to_string(n) + "x" +
                                 std::to_string(p) + " matrix (Eigen status " +
                                 std::to_string(static_cast<int>(svd.info())) + ")");

    PCBasis basis;
    basis.d = svd.singularValues().head(m);
    MatrixXd U = svd.matrixU().leftCols(m);
    MatrixXd V = svd.matrixV().leftCols(m);

    const double top = m > 0 ? basis.d(0) : 0.0;
    basis.rank_tol = static_cast<double>(std::max(n, p)) * std::numeric_limits<double>::epsilon() *
                     std::max(top, 1e-300);
    Index live = 0;
    while (live < m && basis.d(live) > basis.rank_tol) ++live;
    basis.live = live;

    if (live < m) {
        // Complete dead columns deterministically: orthonormal complement of
        // [live columns, constant direction]; the constant direction itself
        // is used last, only when nothing else is left.
        MatrixXd B(n, live + 1);
        B.leftCols(live) = U.leftCols(live);
        B.col(live).setConstant(1.0 / std::sqrt(static_cast<double>(n)));
        Eigen::HouseholderQR<MatrixXd> qr(B);
        const MatrixXd Q = qr.householderQ() * MatrixXd::Identity(n, n);
        const Index dead = m - live;
        const Index spare = n - live - 1;
        for (Index k = 0; k < dead; ++k) {
            const Index src = k < spare ? live + 1 + k : live;
            U.col(live + k) = Q.col(src);
            V.col(live + k).setZero();
            basis.d(live + k) = std::max(basis.d(live + k), 0.0);
        }
    }

    fix_signs(U, V);
    basis.Utilde = std::sqrt(static_cast<double>(n)) * U;
    basis.loadings = std::move(V);
    basis.col_means = VectorXd::Zero(p);
    return basis;
}

PCBasis pc_basis(const Dataset& data) {
    const CenteredDataset c = center_dataset(data);
    PCBasis basis = pc_basis(c.data.Z);
    basis.col_means = c.centering.col_means;
    basis.y_mean = c.centering.y_mean;
    return basis;
}

VectorXd embed_row(const PCBasis& basis, const Eigen::Ref<const VectorXd>& z_row) {
    if (z_row.size() != basis.loadings.rows())
        throw std::invalid_argument("embed_row: row has " + std::to_string(z_row.size()) +
                                    " entries, basis expects " + std::to_string(basis.loadings.rows()));
    const VectorXd centered = z_row - basis.col_means;
    const double scale = std::sqrt(static_cast<double>(basis.n()));
    VectorXd scores = VectorXd::Zero(basis.m());
    for (Index k = 0; k < basis.live; ++k)
        scores(k) = scale * basis.loadings.col(k).dot(centered) / basis.d(k);
    return scores;
}

MatrixXd embed_rows(const PCBasis& basis, const Eigen::Ref<const MatrixXd>& Z_new) {
    MatrixXd out(Z_new.rows(), basis.m());
    for (Index i = 0; i < Z_new.rows(); ++i) out.row(i) = embed_row(basis, Z_new.row(i).transpose()).transpose();
    return out;
}

}  // namespace rpcr
