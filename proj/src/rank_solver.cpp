#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "rpcr/solver.hpp"

namespace rpcr {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string_view to_string(RankSolverMethod method) {
    switch (method) {
    case RankSolverMethod::Lp: return "lp";
    case RankSolverMethod::SmoothedFirstOrder: return "smoothed";
    case RankSolverMethod::Auto: return "auto";
    }
    return "auto";
}

RankSolverMethod parse_rank_solver_method(std::string_view name) {
    if (name == "lp") return RankSolverMethod::Lp;
    if (name == "smoothed" || name == "smoothed_first_order") return RankSolverMethod::SmoothedFirstOrder;
    if (name == "auto") return RankSolverMethod::Auto;
    throw std::invalid_argument("unknown rank solver '" + std::string(name) + "' (expected lp, smoothed or auto)");
}

RankProblem make_rank_problem(const Eigen::Ref<const VectorXd>& y, const Eigen::Ref<const MatrixXd>& design) {
    if (y.size() != design.rows()) throw std::invalid_argument("rank problem: y and design row counts differ");
    RankProblem prob;
    prob.y = y.array() - y.mean();
    prob.design = design.rowwise() - design.colwise().mean();
    return prob;
}

double weighted_rank_objective(const RankProblem& prob, const VectorXd& weights, const VectorXd& theta) {
    return rank_loss_fast(theta, prob) + weights.cwiseProduct(theta.cwiseAbs()).sum();
}

namespace {

// Unordered pairs i < j in lexicographic order.
struct Pairs {
    std::vector<int> first;
    std::vector<int> second;
    Index size() const { return static_cast<Index>(first.size()); }
};

Pairs make_pairs(Index n) {
    Pairs pairs;
    const auto count = static_cast<std::size_t>(n * (n - 1) / 2);
    pairs.first.reserve(count);
    pairs.second.reserve(count);
    for (Index i = 0; i < n; ++i)
        for (Index j = i + 1; j < n; ++j) {
            pairs.first.push_back(static_cast<int>(i));
            pairs.second.push_back(static_cast<int>(j));
        }
    return pairs;
}

// out_p = f_i - f_j
VectorXd node_to_pair(const Pairs& pairs, const VectorXd& f) {
    VectorXd out(pairs.size());
    for (Index p = 0; p < pairs.size(); ++p)
        out(p) = f(pairs.first[static_cast<std::size_t>(p)]) - f(pairs.second[static_cast<std::size_t>(p)]);
    return out;
}

// g_i = sum_{p=(i,.)} v_p - sum_{p=(.,i)} v_p, so G^T v = X^T g.
VectorXd pair_to_node(const Pairs& pairs, const VectorXd& v, Index n) {
    VectorXd g = VectorXd::Zero(n);
    for (Index p = 0; p < pairs.size(); ++p) {
        g(pairs.first[static_cast<std::size_t>(p)]) += v(p);
        g(pairs.second[static_cast<std::size_t>(p)]) -= v(p);
    }
    return g;
}

// Weighted graph Laplacian: sum_p w_p (e_i - e_j)(e_i - e_j)^T.
MatrixXd pair_laplacian(const Pairs& pairs, const VectorXd& w, Index n) {
    MatrixXd lap = MatrixXd::Zero(n, n);
    for (Index p = 0; p < pairs.size(); ++p) {
        const int i = pairs.first[static_cast<std::size_t>(p)];
        const int j = pairs.second[static_cast<std::size_t>(p)];
        lap(i, j) -= w(p);
        lap(j, i) -= w(p);
        lap(i, i) += w(p);
        lap(j, j) += w(p);
    }
    return lap;
}

// The solve works on the free (unmasked) columns only.
struct Restricted {
    MatrixXd design;            // n x k
    VectorXd weights;           // k
    std::vector<Index> columns; // original column of each free coordinate
};

Restricted restrict_problem(const RankProblem& prob, const VectorXd& weights, const SolveOptions& opts) {
    Restricted r;
    const Index m = prob.m();
    if (opts.fixed_zero_mask && static_cast<Index>(opts.fixed_zero_mask->size()) != m)
        throw std::invalid_argument("solve_weighted_rank_l1: mask length differs from column count");
    for (Index j = 0; j < m; ++j)
        if (!opts.fixed_zero_mask || !(*opts.fixed_zero_mask)[static_cast<std::size_t>(j)]) r.columns.push_back(j);
    const auto k = static_cast<Index>(r.columns.size());
    r.design.resize(prob.n(), k);
    r.weights.resize(k);
    for (Index c = 0; c < k; ++c) {
        r.design.col(c) = prob.design.col(r.columns[static_cast<std::size_t>(c)]);
        r.weights(c) = weights(r.columns[static_cast<std::size_t>(c)]);
    }
    return r;
}

VectorXd scatter(const Restricted& r, const VectorXd& theta_free, Index m) {
    VectorXd theta = VectorXd::Zero(m);
    for (Index c = 0; c < theta_free.size(); ++c) theta(r.columns[static_cast<std::size_t>(c)]) = theta_free(c);
    return theta;
}

double pair_weight(Index n) { return 2.0 / (static_cast<double>(n) * static_cast<double>(n - 1)); }

// G_S^T G_S for the pair design restricted to columns X: X^T (n I - 1 1^T) X.
MatrixXd pair_gram(const MatrixXd& X) {
    const auto n = static_cast<double>(X.rows());
    const VectorXd colsum = X.colwise().sum().transpose();
    return n * (X.transpose() * X) - colsum * colsum.transpose();
}

double dual_bound_restricted(const MatrixXd& X, const VectorXd& y, const VectorXd& w, const Pairs& pairs,
                             VectorXd z) {
    const Index n = y.size();
    const double omega = pair_weight(n);
    std::vector<Index> free_cols, pen_cols;
    for (Index j = 0; j < w.size(); ++j) (w(j) > 0.0 ? pen_cols : free_cols).push_back(j);

    if (!free_cols.empty()) {
        MatrixXd XS(n, static_cast<Index>(free_cols.size()));
        for (Index c = 0; c < XS.cols(); ++c) XS.col(c) = X.col(free_cols[static_cast<std::size_t>(c)]);
        // project z onto {G_S^T z = 0}
        const VectorXd rhs = XS.transpose() * pair_to_node(pairs, z, n);
        Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(pair_gram(XS));
        const VectorXd coef = cod.solve(rhs);
        z -= node_to_pair(pairs, XS * coef);
    }

    double scale = 1.0;
    const double zmax = z.cwiseAbs().maxCoeff();
    if (zmax > omega) scale = omega / zmax;
    if (!pen_cols.empty()) {
        const VectorXd g = pair_to_node(pairs, z, n);
        for (const Index j : pen_cols) {
            const double v = std::abs(X.col(j).dot(g));
            if (v > w(j)) scale = std::min(scale, w(j) / v);
        }
    }
    const VectorXd d = node_to_pair(pairs, y);
    return scale * z.dot(d);
}

struct InnerResult {
    VectorXd theta;     // free coordinates
    VectorXd pair_dual; // original units, |z| <= 2/(n(n-1)) up to rounding
    int iterations = 0;
    bool finished = false;
};

// Mehrotra predictor-corrector on the dual of the weighted LAD problem
//   min sum_k omega_k |b_k - a_k^T theta|
// whose rows are the n(n-1)/2 pairs (omega = 1 after rescaling) and one row
// per penalized coordinate (a = e_j, b = 0, omega = w_j / pair weight):
//   max b^T z  s.t.  A^T z = 0,  -omega <= z <= omega.
InnerResult interior_point(const MatrixXd& X, const VectorXd& y, const VectorXd& w, const Pairs& pairs,
                           double target_gap, int max_iters) {
    const Index n = y.size();
    const Index k = X.cols();
    const Index np = pairs.size();
    const double pw = pair_weight(n);

    std::vector<Index> pen;
    for (Index j = 0; j < k; ++j)
        if (w(j) > 0.0) pen.push_back(j);
    const auto npen = static_cast<Index>(pen.size());
    const Index rows = np + npen;

    VectorXd omega(rows), b = VectorXd::Zero(rows);
    omega.head(np).setOnes();
    b.head(np) = node_to_pair(pairs, y);
    for (Index q = 0; q < npen; ++q) omega(np + q) = w(pen[static_cast<std::size_t>(q)]) / pw;

    auto apply_A = [&](const VectorXd& th) {
        VectorXd out(rows);
        out.head(np) = node_to_pair(pairs, X * th);
        for (Index q = 0; q < npen; ++q) out(np + q) = th(pen[static_cast<std::size_t>(q)]);
        return out;
    };
    auto apply_At = [&](const VectorXd& z) {
        VectorXd out = X.transpose() * pair_to_node(pairs, z.head(np), n);
        for (Index q = 0; q < npen; ++q) out(pen[static_cast<std::size_t>(q)]) += z(np + q);
        return out;
    };

    VectorXd theta = VectorXd::Zero(k);
    VectorXd z = VectorXd::Zero(rows);
    VectorXd r = b;
    const double shift = std::max(1e-2 * r.cwiseAbs().mean(), 1e-8);
    VectorXd t1 = (-r).cwiseMax(0.0).array() + shift;
    VectorXd t2 = r.cwiseMax(0.0).array() + shift;

    auto max_step = [](const VectorXd& v, const VectorXd& dv) {
        double alpha = std::numeric_limits<double>::infinity();
        for (Index i = 0; i < v.size(); ++i)
            if (dv(i) < 0.0) alpha = std::min(alpha, -v(i) / dv(i));
        return alpha;
    };

    // the slacks omega + z and omega - z are carried as iterates: recomputing them
    // from z cancels to exactly zero near the bounds
    const double feas_scale = std::max(1.0, X.cwiseAbs().colwise().sum().maxCoeff());
    VectorXd s1 = omega;
    VectorXd s2 = omega;
    InnerResult res;
    double best_comp = std::numeric_limits<double>::infinity();
    int best_it = 0;
    for (int it = 0; it < max_iters; ++it) {
        const double comp = s1.dot(t1) + s2.dot(t2);
        const double mu = comp / static_cast<double>(2 * rows);
        res.iterations = it;
        const VectorXd rp = -apply_At(z);
        const double infeas = rp.cwiseAbs().maxCoeff();
        // near a degenerate vertex the Newton steps can lose dual feasibility for good,
        // so the best nearly feasible iterate is what gets returned
        if (infeas <= 1e-7 * feas_scale && comp < best_comp) {
            best_comp = comp;
            best_it = it;
            res.theta = theta;
            res.pair_dual = pw * z.head(np);
        }
        if (comp <= target_gap && infeas <= 1e-7 * feas_scale) {
            res.finished = true;
            break;
        }
        if (it - best_it > 10) break;  // stalled

        const VectorXd rd = b - apply_A(theta) - t2 + t1;
        const VectorXd dinv = t1.cwiseQuotient(s1) + t2.cwiseQuotient(s2);
        const VectorXd D = dinv.cwiseInverse();

        MatrixXd M = X.transpose() * pair_laplacian(pairs, D.head(np), n) * X;
        for (Index q = 0; q < npen; ++q) {
            const Index j = pen[static_cast<std::size_t>(q)];
            M(j, j) += D(np + q);
        }
        const double ridge = 1e-13 * std::max(M.diagonal().cwiseAbs().maxCoeff(), 1e-300);
        M.diagonal().array() += ridge;
        Eigen::LDLT<MatrixXd> ldlt(M);
        if (ldlt.info() != Eigen::Success) break;

        auto direction = [&](const VectorXd& r1, const VectorXd& r2, VectorXd& dz, VectorXd& dth, VectorXd& dt1,
                             VectorXd& dt2) {
            const VectorXd q = rd - r2.cwiseQuotient(s2) + r1.cwiseQuotient(s1);
            dth = ldlt.solve(apply_At(D.cwiseProduct(q)) - rp);
            dz = D.cwiseProduct(q - apply_A(dth));
            dt1 = (r1 - t1.cwiseProduct(dz)).cwiseQuotient(s1);
            dt2 = (r2 + t2.cwiseProduct(dz)).cwiseQuotient(s2);
        };

        VectorXd dz, dth, dt1, dt2;
        direction(-s1.cwiseProduct(t1), -s2.cwiseProduct(t2), dz, dth, dt1, dt2);
        const double ap_aff = std::min(1.0, std::min(max_step(s1, dz), max_step(s2, -dz)));
        const double ad_aff = std::min(1.0, std::min(max_step(t1, dt1), max_step(t2, dt2)));
        const double comp_aff = (s1 + ap_aff * dz).dot(t1 + ad_aff * dt1) + (s2 - ap_aff * dz).dot(t2 + ad_aff * dt2);
        const double sigma = std::pow(comp_aff / comp, 3.0);

        const VectorXd r1 = (sigma * mu - s1.cwiseProduct(t1).array() - dz.cwiseProduct(dt1).array()).matrix();
        const VectorXd r2 = (sigma * mu - s2.cwiseProduct(t2).array() + dz.cwiseProduct(dt2).array()).matrix();
        direction(r1, r2, dz, dth, dt1, dt2);
        // numerical breakdown near the optimum: keep the last finite iterate
        if (!dz.allFinite() || !dth.allFinite() || !dt1.allFinite() || !dt2.allFinite()) break;

        const double ap = std::min(1.0, 0.99995 * std::min(max_step(s1, dz), max_step(s2, -dz)));
        const double ad = std::min(1.0, 0.99995 * std::min(max_step(t1, dt1), max_step(t2, dt2)));
        z += ap * dz;
        s1 += ap * dz;
        s2 -= ap * dz;
        theta += ad * dth;
        t1 += ad * dt1;
        t2 += ad * dt2;
        res.iterations = it + 1;
    }
    if (!std::isfinite(best_comp)) {
        res.theta = theta;
        res.pair_dual = pw * z.head(np);
    }
    return res;
}

struct SmoothResult {
    VectorXd theta;
    VectorXd pair_dual;
    int iterations = 0;
};

// Dual candidate read off a primal point: nonactive pairs take the sign of their
// residual, and the pairs with residual at most tau are solved (least squares,
// then clipped) so that stationarity holds on free and nonzero coordinates.
VectorXd polish_dual(const MatrixXd& X, const VectorXd& y, const VectorXd& w, const Pairs& pairs,
                     const VectorXd& theta, double tau) {
    const Index n = y.size();
    const double pw = pair_weight(n);
    const VectorXd res = node_to_pair(pairs, y - X * theta);
    VectorXd z(pairs.size());
    std::vector<Index> active;
    for (Index p = 0; p < res.size(); ++p) {
        if (std::abs(res(p)) <= tau) {
            active.push_back(p);
            z(p) = 0.0;
        } else {
            z(p) = res(p) > 0.0 ? pw : -pw;
        }
    }
    if (active.empty()) return z;
    std::vector<Index> eq;
    for (Index j = 0; j < X.cols(); ++j)
        if (w(j) == 0.0 || theta(j) != 0.0) eq.push_back(j);
    if (eq.empty()) return z;
    const VectorXd current = X.transpose() * pair_to_node(pairs, z, n);
    const auto na = static_cast<Index>(active.size());
    const auto ne = static_cast<Index>(eq.size());
    MatrixXd A(ne, na);
    VectorXd rhs(ne);
    for (Index e = 0; e < ne; ++e) {
        const Index j = eq[static_cast<std::size_t>(e)];
        const double target = w(j) == 0.0 ? 0.0 : (theta(j) > 0.0 ? w(j) : -w(j));
        rhs(e) = target - current(j);
        for (Index a = 0; a < na; ++a) {
            const Index p = active[static_cast<std::size_t>(a)];
            A(e, a) = X(pairs.first[static_cast<std::size_t>(p)], j) - X(pairs.second[static_cast<std::size_t>(p)], j);
        }
    }
    const VectorXd za = Eigen::CompleteOrthogonalDecomposition<MatrixXd>(A).solve(rhs);
    for (Index a = 0; a < na; ++a) z(active[static_cast<std::size_t>(a)]) = std::clamp(za(a), -pw, pw);
    return z;
}

double quantile_sorted(const std::vector<double>& v, double q) {
    if (v.empty()) return 0.0;
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

double rank_dual_bound(const RankProblem& prob, const VectorXd& weights, const VectorXd& pair_dual) {
    const Pairs pairs = make_pairs(prob.n());
    if (pair_dual.size() != pairs.size()) throw std::invalid_argument("rank_dual_bound: wrong dual length");
    return dual_bound_restricted(prob.design, prob.y, weights, pairs, pair_dual);
}

SolveReport solve_weighted_rank_l1(const RankProblem& prob, const VectorXd& weights, const SolveOptions& opts) {
    const Index n = prob.n();
    const Index m = prob.m();
    if (prob.design.rows() != n) throw std::invalid_argument("solve_weighted_rank_l1: design/response size mismatch");
    if (n < 2) throw std::invalid_argument("solve_weighted_rank_l1: need at least two observations");
    if (weights.size() != m) throw std::invalid_argument("solve_weighted_rank_l1: weight length differs from column count");
    if (!weights.allFinite() || (weights.array() < 0.0).any())
        throw std::invalid_argument("solve_weighted_rank_l1: weights must be finite and nonnegative");
    if (!(opts.obj_tol > 0.0)) throw std::invalid_argument("solve_weighted_rank_l1: obj_tol must be positive");

    const Restricted r = restrict_problem(prob, weights, opts);
    const Index k = r.design.cols();
    const Pairs pairs = make_pairs(n);
    const double pw = pair_weight(n);

    SolveReport report;
    report.method = opts.method == RankSolverMethod::Auto
                        ? (n <= 200 ? RankSolverMethod::Lp : RankSolverMethod::SmoothedFirstOrder)
                        : opts.method;

    auto certify = [&](const VectorXd& theta_free, const VectorXd& pair_dual) {
        report.theta_hat = scatter(r, theta_free, m);
        report.objective = weighted_rank_objective(prob, weights, report.theta_hat);
        const double bound = dual_bound_restricted(r.design, prob.y, r.weights, pairs, pair_dual);
        report.certificate_gap = report.objective - bound;
        report.converged = report.certificate_gap <= opts.obj_tol * std::max(1.0, report.objective);
    };

    if (k == 0) {
        // nothing free: theta = 0, the zero dual certifies the unpenalized loss via pair signs
        const VectorXd d = node_to_pair(pairs, prob.y);
        certify(VectorXd::Zero(0), pw * d.cwiseSign());
        return report;
    }

    if (report.method == RankSolverMethod::Lp) {
        // tighten the interior gap until the certificate passes
        const double loss0 = rank_loss_fast(VectorXd::Zero(m), prob);
        double target = 1e-3 * opts.obj_tol * std::max(1.0, loss0) / pw;
        int total = 0;
        for (int attempt = 0; attempt < 4; ++attempt) {
            const InnerResult ip = interior_point(r.design, prob.y, r.weights, pairs, target,
                                                  std::min(200, std::max(1, opts.max_iters - total)));
            total += ip.iterations;
            VectorXd theta = ip.theta;
            // snap near-zero penalized coordinates; keep the snap only if it does not hurt
            VectorXd snapped = theta;
            const double thr = 1e-7 * std::max(1.0, theta.cwiseAbs().maxCoeff());
            for (Index c = 0; c < k; ++c)
                if (r.weights(c) > 0.0 && std::abs(snapped(c)) <= thr) snapped(c) = 0.0;
            const double f_raw = weighted_rank_objective(prob, weights, scatter(r, theta, m));
            const double f_snap = weighted_rank_objective(prob, weights, scatter(r, snapped, m));
            if (f_snap <= f_raw + 1e-3 * opts.obj_tol * std::max(1.0, f_raw)) theta = snapped;
            VectorXd dual = ip.pair_dual;
            certify(theta, dual);
            if (!report.converged && dual.allFinite()) {
                double bound = dual_bound_restricted(r.design, prob.y, r.weights, pairs, dual);
                const double res_scale = std::max(1.0, node_to_pair(pairs, prob.y).cwiseAbs().maxCoeff());
                const VectorXd res = node_to_pair(pairs, prob.y - r.design * theta);
                for (const double tau : {1e-6 * res_scale, 1e-8 * res_scale}) {
                    // interior dual with clearly untied pairs moved to the sign of their residual
                    VectorXd snapped_dual = ip.pair_dual;
                    for (Index p = 0; p < res.size(); ++p)
                        if (std::abs(res(p)) > tau) snapped_dual(p) = res(p) > 0.0 ? pw : -pw;
                    for (const VectorXd& cand :
                         {snapped_dual, polish_dual(r.design, prob.y, r.weights, pairs, theta, tau)}) {
                        const double b = dual_bound_restricted(r.design, prob.y, r.weights, pairs, cand);
                        if (b > bound) {
                            bound = b;
                            dual = cand;
                        }
                    }
                }
            }
            certify(theta, dual);
            report.iterations = total;
            // a stalled interior run would only repeat itself with a tighter target
            if (report.converged || !ip.finished || total >= opts.max_iters) break;
            target *= 1e-2;
        }
        if (!report.converged) {
            // degenerate vertices can leave the interior dual weak; any dual bound is
            // valid for any primal, so combine with the smoothed backend
            SolveOptions alt = opts;
            alt.method = RankSolverMethod::SmoothedFirstOrder;
            const SolveReport sm = solve_weighted_rank_l1(prob, weights, alt);
            double bound = sm.objective - sm.certificate_gap;
            const double lp_bound = report.objective - report.certificate_gap;
            if (std::isfinite(lp_bound) && !(lp_bound <= bound)) bound = lp_bound;
            if (!std::isfinite(report.objective) || sm.objective < report.objective) {
                report.theta_hat = sm.theta_hat;
                report.objective = sm.objective;
            }
            report.iterations += sm.iterations;
            report.certificate_gap = report.objective - bound;
            report.converged = report.certificate_gap <= opts.obj_tol * std::max(1.0, report.objective);
        }
        return report;
    }

    // Huber continuation with accelerated proximal gradient (FISTA + adaptive restart).
    const VectorXd d = node_to_pair(pairs, prob.y);
    std::vector<double> diffs(d.data(), d.data() + d.size());
    std::sort(diffs.begin(), diffs.end());
    double mu = (quantile_sorted(diffs, 0.75) - quantile_sorted(diffs, 0.25)) / static_cast<double>(n);
    if (!(mu > 0.0)) mu = 1e-3 * (d.cwiseAbs().maxCoeff() + 1.0);

    const MatrixXd& X = r.design;
    const double gram_top =
        Eigen::SelfAdjointEigenSolver<MatrixXd>(pair_gram(X), Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
    const double lip_base = pw * std::max(gram_top, 1e-300);

    VectorXd theta = VectorXd::Zero(k);
    VectorXd pair_dual = VectorXd::Zero(pairs.size());
    int total = 0;
    auto huber_dual = [&](const VectorXd& th, double smooth) {
        const VectorXd res = d - node_to_pair(pairs, X * th);
        return VectorXd((pw * (res / smooth).array().max(-1.0).min(1.0)).matrix());
    };
    auto smooth_value = [&](const VectorXd& th, double smooth) {
        const VectorXd res = d - node_to_pair(pairs, X * th);
        double acc = 0.0;
        for (Index p = 0; p < res.size(); ++p) {
            const double a = std::abs(res(p));
            acc += a <= smooth ? a * a / (2.0 * smooth) : a - smooth / 2.0;
        }
        return pw * acc + r.weights.cwiseProduct(th.cwiseAbs()).sum();
    };

    for (int round = 0; total < opts.max_iters; ++round, mu /= 4.0) {
        const double step = mu / lip_base;
        VectorXd x = theta, yk = theta;
        double tk = 1.0;
        double fprev = smooth_value(x, mu);
        const int round_cap = std::max(200, opts.max_iters / 6);
        for (int it = 0; it < round_cap && total < opts.max_iters; ++it, ++total) {
            const VectorXd grad = -X.transpose() * pair_to_node(pairs, huber_dual(yk, mu), n);
            VectorXd xn = yk - step * grad;
            for (Index c = 0; c < k; ++c) xn(c) = soft_threshold(xn(c), step * r.weights(c));
            const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
            // gradient-based restart
            if ((yk - xn).dot(xn - x) > 0.0) {
                yk = xn;
                tk = 1.0;
            } else {
                yk = xn + ((tk - 1.0) / tn) * (xn - x);
                tk = tn;
            }
            const double move = (xn - x).cwiseAbs().maxCoeff();
            x = xn;
            if ((it + 1) % 25 == 0) {
                const double f = smooth_value(x, mu);
                const bool flat = std::abs(fprev - f) <= 1e-13 * std::max(1.0, std::abs(f));
                fprev = f;
                if (flat || move <= 1e-12 * std::max(1.0, x.cwiseAbs().maxCoeff())) break;
            }
        }
        theta = x;
        // snap penalized coordinates that sit within the smoothing scale of zero
        for (Index c = 0; c < k; ++c)
            if (r.weights(c) > 0.0 && std::abs(theta(c)) <= 1e-9 * std::max(1.0, theta.cwiseAbs().maxCoeff()))
                theta(c) = 0.0;
        // keep the best of the smoothed dual and the polished duals at a few active-set scales
        VectorXd best_dual = huber_dual(theta, mu);
        double best_bound = dual_bound_restricted(X, prob.y, r.weights, pairs, best_dual);
        const double res_scale = std::max(1.0, d.cwiseAbs().maxCoeff());
        for (const double tau : {10.0 * mu, mu, 1e-6 * res_scale, 1e-9 * res_scale}) {
            const VectorXd cand = polish_dual(X, prob.y, r.weights, pairs, theta, tau);
            const double bound = dual_bound_restricted(X, prob.y, r.weights, pairs, cand);
            if (bound > best_bound) {
                best_bound = bound;
                best_dual = cand;
            }
        }
        pair_dual = best_dual;
        certify(theta, pair_dual);
        report.iterations = total;
        if (report.converged) break;
    }
    return report;
}

}  // namespace rpcr
