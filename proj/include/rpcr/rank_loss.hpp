#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "rpcr/rng.hpp"

namespace rpcr {

/// Centered response paired with a centered design. Losses and solvers only
/// look at pairwise differences, so centering is a convention here rather
/// than a requirement of the arithmetic.
struct RankProblem {
    Eigen::VectorXd y;
    Eigen::MatrixXd design;

    Eigen::Index n() const { return y.size(); }
    Eigen::Index m() const { return design.cols(); }
};

/// Centers both y and the design columns.
RankProblem make_rank_problem(const Eigen::Ref<const Eigen::VectorXd>& y,
                              const Eigen::Ref<const Eigen::MatrixXd>& design);

namespace detail {

inline void check_dims(Eigen::Index n_y, Eigen::Index n_design, Eigen::Index m_design, Eigen::Index m_theta) {
    if (n_y != n_design || m_design != m_theta)
        throw std::invalid_argument("rank loss: dimension mismatch");
    if (n_y < 2) throw std::invalid_argument("rank loss: need at least two observations");
}

}  // namespace detail

/// Midranks (1-based) of the entries of r; tied entries share the average of
/// the ranks they occupy.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> midranks(const Eigen::MatrixBase<Derived>& r) {
    using Scalar = typename Derived::Scalar;
    const Eigen::Index n = r.size();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return r(a) < r(b); });
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> ranks(n);
    Eigen::Index start = 0;
    while (start < n) {
        Eigen::Index stop = start + 1;
        while (stop < n && r(order[static_cast<std::size_t>(stop)]) == r(order[static_cast<std::size_t>(start)]))
            ++stop;
        const Scalar mid = Scalar(start + 1 + stop) / Scalar(2);
        for (Eigen::Index k = start; k < stop; ++k) ranks(order[static_cast<std::size_t>(k)]) = mid;
        start = stop;
    }
    return ranks;
}

/// Wilcoxon pairwise loss by direct enumeration over ordered pairs:
/// (1/(n(n-1))) sum_{i != j} |(y_i - y_j) - (x_i - x_j)^T theta|.
/// O(n^2 m); the reference path the fast evaluation is checked against.
template <typename DerivedT, typename DerivedY, typename DerivedX>
typename DerivedY::Scalar rank_loss_pairwise(const Eigen::MatrixBase<DerivedT>& theta,
                                             const Eigen::MatrixBase<DerivedY>& y,
                                             const Eigen::MatrixBase<DerivedX>& design) {
    using Scalar = typename DerivedY::Scalar;
    detail::check_dims(y.size(), design.rows(), design.cols(), theta.size());
    const Eigen::Index n = y.size();
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> fit = design * theta;
    // Fixed summation order: row-by-row, each row summed left to right.
    Scalar total(0);
    for (Eigen::Index i = 0; i < n; ++i) {
        Scalar row(0);
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) continue;
            row += std::abs((y(i) - y(j)) - (fit(i) - fit(j)));
        }
        total += row;
    }
    return total / (Scalar(n) * Scalar(n - 1));
}

/// Same value from sorted residuals (Jaeckel dispersion with Wilcoxon scores):
/// sum_{i<j} |r_i - r_j| = sum_i (2 R_i - (n+1)) r_i, R_i the midrank of r_i.
template <typename DerivedR>
typename DerivedR::Scalar rank_loss_from_residuals(const Eigen::MatrixBase<DerivedR>& r) {
    using Scalar = typename DerivedR::Scalar;
    const Eigen::Index n = r.size();
    if (n < 2) throw std::invalid_argument("rank loss: need at least two observations");
    // sorted-order form avoids materializing ranks: sum_k (2k - n - 1) r_(k)
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> sorted = r;
    std::sort(sorted.data(), sorted.data() + n);
    Scalar acc(0);
    for (Eigen::Index k = 0; k < n; ++k) acc += Scalar(2 * (k + 1) - (n + 1)) * sorted(k);
    return Scalar(2) * acc / (Scalar(n) * Scalar(n - 1));
}

template <typename DerivedT, typename DerivedY, typename DerivedX>
typename DerivedY::Scalar rank_loss_fast(const Eigen::MatrixBase<DerivedT>& theta,
                                         const Eigen::MatrixBase<DerivedY>& y,
                                         const Eigen::MatrixBase<DerivedX>& design) {
    detail::check_dims(y.size(), design.rows(), design.cols(), theta.size());
    return rank_loss_from_residuals(y - design * theta);
}

/// Centered Wilcoxon scores eta_i = 2 R_i - (n + 1) of the residuals.
template <typename DerivedR>
Eigen::Matrix<typename DerivedR::Scalar, Eigen::Dynamic, 1> wilcoxon_scores(const Eigen::MatrixBase<DerivedR>& r) {
    using Scalar = typename DerivedR::Scalar;
    return (Scalar(2) * midranks(r)).array() - Scalar(r.size() + 1);
}

/// Negative (sub)gradient of the rank loss: S = 2/(n(n-1)) X^T eta(theta).
/// With tied residuals this is the midrank selection from the subdifferential.
template <typename DerivedT, typename DerivedY, typename DerivedX>
Eigen::Matrix<typename DerivedY::Scalar, Eigen::Dynamic, 1> rank_score(const Eigen::MatrixBase<DerivedT>& theta,
                                                                       const Eigen::MatrixBase<DerivedY>& y,
                                                                       const Eigen::MatrixBase<DerivedX>& design) {
    using Scalar = typename DerivedY::Scalar;
    detail::check_dims(y.size(), design.rows(), design.cols(), theta.size());
    const Eigen::Index n = y.size();
    const auto eta = wilcoxon_scores(y - design * theta);
    return (Scalar(2) / (Scalar(n) * Scalar(n - 1))) * (design.transpose() * eta);
}

inline double rank_loss_pairwise(const Eigen::VectorXd& theta, const RankProblem& prob) {
    return rank_loss_pairwise(theta, prob.y, prob.design);
}
inline double rank_loss_fast(const Eigen::VectorXd& theta, const RankProblem& prob) {
    return rank_loss_fast(theta, prob.y, prob.design);
}
inline Eigen::VectorXd rank_score(const Eigen::VectorXd& theta, const RankProblem& prob) {
    return rank_score(theta, prob.y, prob.design);
}

/// Score under a uniformly random ranking: -2/(n(n-1)) X^T (2 r - (n+1) 1)
/// with r a permutation of (1..n) drawn from `rng`.
template <typename DerivedX>
Eigen::Matrix<typename DerivedX::Scalar, Eigen::Dynamic, 1> simulated_score(const Eigen::MatrixBase<DerivedX>& design,
                                                                            Rng& rng) {
    using Scalar = typename DerivedX::Scalar;
    const Eigen::Index n = design.rows();
    const std::vector<int> perm = rng.permutation(static_cast<int>(n));
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> xi(n);
    for (Eigen::Index i = 0; i < n; ++i) xi(i) = Scalar(2 * perm[static_cast<std::size_t>(i)] - (n + 1));
    return (Scalar(-2) / (Scalar(n) * Scalar(n - 1))) * (design.transpose() * xi);
}

}  // namespace rpcr
