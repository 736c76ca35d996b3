#pragma once

#include <Eigen/Dense>

namespace rpcr {

/// Observed predictors Z (n x p) and response y (length n).
struct Dataset {
    Eigen::MatrixXd Z;
    Eigen::VectorXd y;

    Eigen::Index n() const { return Z.rows(); }
    Eigen::Index p() const { return Z.cols(); }
};

/// Throws std::invalid_argument unless n >= 3, p >= 1, sizes agree and all
/// entries are finite.
void validate(const Dataset& data);

struct Centering {
    Eigen::VectorXd col_means;
    double y_mean = 0.0;
};

struct CenteredDataset {
    Dataset data;
    Centering centering;
};

CenteredDataset center_dataset(const Dataset& raw);

/// Scaled empirical principal-components design of a (centered) predictor
/// matrix: Utilde = sqrt(n) * U_hat from the thin SVD Z = U_hat D V^T.
///
/// Columns are ordered by nonincreasing singular value and each column's
/// largest-magnitude entry is positive (first occurrence on ties). Columns
/// whose singular value is numerically zero are completed to an orthonormal
/// set; when m = n one of them is necessarily the constant direction.
struct PCBasis {
    Eigen::MatrixXd Utilde;     // n x m
    Eigen::VectorXd d;          // m singular values, nonincreasing
    Eigen::VectorXd col_means;  // centering of Z (zero when built from centered data)
    double y_mean = 0.0;
    Eigen::Index live = 0;      // number of components with d_k above the rank tolerance
    double rank_tol = 0.0;

    // Right singular vectors, kept only so new rows can be embedded.
    Eigen::MatrixXd loadings;   // p x m

    Eigen::Index n() const { return Utilde.rows(); }
    Eigen::Index m() const { return Utilde.cols(); }
};

/// Thin SVD of `Z` as given (no centering is applied here).
PCBasis pc_basis(const Eigen::MatrixXd& Z);

/// Centers `data`, then builds the basis; records the centering constants.
PCBasis pc_basis(const Dataset& data);

/// Scores of an uncentered new row: sqrt(n) D^{-1} V^T (z - col_means) on
/// live components, 0 on dead ones.
Eigen::VectorXd embed_row(const PCBasis& basis, const Eigen::Ref<const Eigen::VectorXd>& z_row);

/// Row-wise embed_row.
Eigen::MatrixXd embed_rows(const PCBasis& basis, const Eigen::Ref<const Eigen::MatrixXd>& Z_new);

}  // namespace rpcr
