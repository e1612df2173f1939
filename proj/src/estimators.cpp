#include "coblock/estimators.hpp"
#include "coblock/rng.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace coblock {

TruncatedSvd truncated_svd(const Eigen::MatrixXd& A, int K, std::uint64_t seed,
                           double tol, int max_iters) {
    const int m = static_cast<int>(A.rows());
    const int n = static_cast<int>(A.cols());
    if (m == 0 || n == 0) throw std::invalid_argument("truncated_svd: empty matrix");
    if (K < 1 || K > std::min(m, n))
        throw std::invalid_argument("truncated_svd: K outside [1, min(m,n)]");

    SplitRng rng(derive_seed(seed, {0x5du}));
    Eigen::MatrixXd V(n, K);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < K; ++k) V(j, k) = rng.next_gaussian();
    V = Eigen::HouseholderQR<Eigen::MatrixXd>(V).householderQ() *
        Eigen::MatrixXd::Identity(n, K);

    TruncatedSvd out;
    Eigen::MatrixXd U(m, K);
    for (int it = 0; it < max_iters; ++it) {
        Eigen::MatrixXd AV = A * V;  // m x K
        U = Eigen::HouseholderQR<Eigen::MatrixXd>(AV).householderQ() *
            Eigen::MatrixXd::Identity(m, K);
        Eigen::MatrixXd AtU = A.transpose() * U;  // n x K
        V = Eigen::HouseholderQR<Eigen::MatrixXd>(AtU).householderQ() *
            Eigen::MatrixXd::Identity(n, K);

        // Rotate to singular triplets via the small projected matrix.
        Eigen::MatrixXd B = U.transpose() * A * V;  // K x K
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(B, Eigen::ComputeFullU | Eigen::ComputeFullV);
        out.U = U * svd.matrixU();
        out.V = V * svd.matrixV();
        out.s = svd.singularValues();

        const double s1 = std::max(out.s(0), 1e-300);
        const Eigen::MatrixXd r1 = A * out.V - out.U * out.s.asDiagonal();
        const Eigen::MatrixXd r2 = A.transpose() * out.U - out.V * out.s.asDiagonal();
        double worst = 0.0;
        for (int k = 0; k < K; ++k)
            worst = std::max(worst, std::max(r1.col(k).norm(), r2.col(k).norm()));
        if (worst <= tol * s1) break;
        U = out.U;
        V = out.V;
    }

    // Deterministic sign: largest-magnitude entry of each right vector positive.
    for (int k = 0; k < K; ++k) {
        int arg = 0;
        for (int j = 1; j < n; ++j)
            if (std::abs(out.V(j, k)) > std::abs(out.V(arg, k))) arg = j;
        if (out.V(arg, k) < 0.0) {
            out.V.col(k) = -out.V.col(k);
            out.U.col(k) = -out.U.col(k);
        }
    }
    return out;
}

std::vector<int> kmeans_labels(const Eigen::MatrixXd& points, int K,
                               std::uint64_t seed, int max_iters, double move_tol) {
    const int n = static_cast<int>(points.rows());
    if (K < 1 || K > n)
        throw std::invalid_argument("kmeans_labels: K outside [1, n]");
    std::vector<int> labels(n, 0);
    if (K == 1) return labels;

    SplitRng rng(derive_seed(seed, {0x6bu}));
    Eigen::MatrixXd centers(K, points.cols());
    centers.row(0) = points.row(static_cast<int>(rng.next_below(n)));
    Eigen::VectorXd nearest =
        (points.rowwise() - centers.row(0)).rowwise().squaredNorm();
    for (int c = 1; c < K; ++c) {
        int arg = 0;
        for (int j = 1; j < n; ++j)
            if (nearest(j) > nearest(arg)) arg = j;
        centers.row(c) = points.row(arg);
        nearest = nearest.cwiseMin(
            (points.rowwise() - centers.row(c)).rowwise().squaredNorm());
    }

    for (int it = 0; it < max_iters; ++it) {
        bool changed = false;
        for (int j = 0; j < n; ++j) {
            int best = 0;
            double best_d = (points.row(j) - centers.row(0)).squaredNorm();
            for (int c = 1; c < K; ++c) {
                const double d = (points.row(j) - centers.row(c)).squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            if (labels[j] != best) {
                labels[j] = best;
                changed = true;
            }
        }
        Eigen::MatrixXd next = Eigen::MatrixXd::Zero(K, points.cols());
        Eigen::VectorXd cnt = Eigen::VectorXd::Zero(K);
        for (int j = 0; j < n; ++j) {
            next.row(labels[j]) += points.row(j);
            cnt(labels[j]) += 1.0;
        }
        double move = 0.0;
        for (int c = 0; c < K; ++c) {
            if (cnt(c) > 0.0) {
                next.row(c) /= cnt(c);
                move = std::max(move, (next.row(c) - centers.row(c)).norm());
                centers.row(c) = next.row(c);
            }
        }
        if (!changed || move < move_tol) break;
    }
    return labels;
}

CoClusterLabels spectral_cocluster(const Eigen::MatrixXd& A, int K,
                                   std::uint64_t seed) {
    const int m = static_cast<int>(A.rows());
    const int n = static_cast<int>(A.cols());
    if (m == 0 || n == 0) throw std::invalid_argument("spectral_cocluster: empty matrix");
    if (K > std::min(m, n))
        throw std::invalid_argument("spectral_cocluster: K exceeds min(m,n)");
    CoClusterLabels out;
    out.K = K;
    if (K == 1) {
        out.S.assign(m, 0);
        out.T.assign(n, 0);
        return out;
    }
    const TruncatedSvd svd = truncated_svd(A, K, seed);
    const Eigen::MatrixXd rows = svd.U * svd.s.asDiagonal();
    const Eigen::MatrixXd cols = svd.V * svd.s.asDiagonal();
    out.S = kmeans_labels(rows, K, derive_seed(seed, {1}));
    out.T = kmeans_labels(cols, K, derive_seed(seed, {2}));
    return out;
}

namespace {

double family1_risk(const Eigen::MatrixXd& A, const std::vector<int>& S,
                    const std::vector<int>& T, const Theta& theta) {
    const int m = static_cast<int>(A.rows());
    const int n = static_cast<int>(A.cols());
    double acc = 0.0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < m; ++i) {
            const double r = A(i, j) - theta(S[i], T[j]);
            acc += r * r;
        }
    return acc / (static_cast<double>(m) * n);
}

// Greedy row-label reassignment for the blockmodel; returns true if any
// label changed. Columns handled by passing the transpose.
bool reassign_blockmodel_rows(const Eigen::MatrixXd& A, std::vector<int>& S,
                              const std::vector<int>& T, const Theta& theta,
                              bool theta_rows) {
    const int m = static_cast<int>(A.rows());
    const int n = static_cast<int>(A.cols());
    const int K = static_cast<int>(theta_rows ? theta.rows() : theta.cols());
    Eigen::VectorXd nt = Eigen::VectorXd::Zero(K);
    for (int j = 0; j < n; ++j) nt(T[j]) += 1.0;
    bool changed = false;
    Eigen::VectorXd a(K);
    for (int i = 0; i < m; ++i) {
        a.setZero();
        for (int j = 0; j < n; ++j) a(T[j]) += A(i, j);
        int best = 0;
        double best_c = std::numeric_limits<double>::infinity();
        for (int s = 0; s < K; ++s) {
            double c = 0.0;
            for (int t = 0; t < K; ++t) {
                const double th = theta_rows ? theta(s, t) : theta(t, s);
                c += nt(t) * th * th - 2.0 * th * a(t);
            }
            if (c < best_c - 1e-15) {
                best_c = c;
                best = s;
            }
        }
        if (best != S[i]) {
            S[i] = best;
            changed = true;
        }
    }
    return changed;
}

}  // namespace

BlockmodelFit fit_blockmodel_als(const Eigen::MatrixXd& A, int K,
                                 const CoClusterLabels& init, int max_iters) {
    if (K < 1) throw std::invalid_argument("fit_blockmodel_als: K must be >= 1");
    BlockmodelFit fit;
    fit.labels = init;
    fit.labels.K = K;
    CoClusterLabels& lab = fit.labels;
    fit.theta = block_summary(A, lab).theta_hat;
    fit.risk_trace.push_back(family1_risk(A, lab.S, lab.T, fit.theta));
    const Eigen::MatrixXd At = A.transpose();
    for (int it = 0; it < max_iters; ++it) {
        fit.theta = block_summary(A, lab).theta_hat;
        bool changed = reassign_blockmodel_rows(A, lab.S, lab.T, fit.theta, true);
        changed |= reassign_blockmodel_rows(At, lab.T, lab.S, fit.theta, false);
        fit.theta = block_summary(A, lab).theta_hat;
        fit.risk_trace.push_back(family1_risk(A, lab.S, lab.T, fit.theta));
        if (!changed) break;
    }
    return fit;
}

Eigen::VectorXd project_to_domain(Eigen::VectorXd v) {
    for (Eigen::Index i = 0; i < v.size(); ++i)
        v(i) = std::clamp(v(i), 0.0, 1.0 - 1e-9);
    const double nrm = v.norm();
    if (nrm > 1.0) v /= nrm;
    return v;
}

namespace {

// Residual of one row of A against fixed column latents.
double row_residual(const Eigen::MatrixXd& A, int i, const Eigen::VectorXd& b,
                    int u, const GeneralLatent& T, const Theta& theta,
                    ModelFamily family) {
    double acc = 0.0;
    for (int j = 0; j < T.size(); ++j) {
        double w = b.dot(T.vectors.row(j));
        if (family != ModelFamily::DotProduct) w *= theta(u, T.labels[j]);
        const double r = A(i, j) - w;
        acc += r * r;
    }
    return acc;
}

void update_vectors(const Eigen::MatrixXd& A, GeneralLatent& S,
                    const GeneralLatent& T, const Theta& theta,
                    ModelFamily family) {
    const int d = S.d;
    for (int i = 0; i < S.size(); ++i) {
        Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(d, d);
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d);
        for (int j = 0; j < T.size(); ++j) {
            Eigen::VectorXd z = T.vectors.row(j).transpose();
            if (family != ModelFamily::DotProduct) z *= theta(S.labels[i], T.labels[j]);
            gram.noalias() += z * z.transpose();
            rhs.noalias() += A(i, j) * z;
        }
        gram.diagonal().array() += 1e-12;
        Eigen::VectorXd cand = project_to_domain(gram.ldlt().solve(rhs));
        const Eigen::VectorXd old = S.vectors.row(i).transpose();
        if (row_residual(A, i, cand, S.labels[i], T, theta, family) <
            row_residual(A, i, old, S.labels[i], T, theta, family))
            S.vectors.row(i) = cand.transpose();
    }
}

void update_labels(const Eigen::MatrixXd& A, GeneralLatent& S,
                   const GeneralLatent& T, const Theta& theta,
                   ModelFamily family) {
    if (family == ModelFamily::DotProduct) return;
    for (int i = 0; i < S.size(); ++i) {
        int best = S.labels[i];
        double best_r = row_residual(A, i, S.vectors.row(i).transpose(), best, T,
                                     theta, family);
        for (int u = 0; u < S.K; ++u) {
            if (u == best) continue;
            const double r = row_residual(A, i, S.vectors.row(i).transpose(), u, T,
                                          theta, family);
            if (r < best_r - 1e-15 || (r < best_r && u < best)) {
                best_r = r;
                best = u;
            }
        }
        S.labels[i] = best;
    }
}

void update_theta(const Eigen::MatrixXd& A, const GeneralLatent& S,
                  const GeneralLatent& T, Theta& theta, ModelFamily family) {
    if (family == ModelFamily::DotProduct) return;
    const int K = static_cast<int>(theta.rows());
    Eigen::MatrixXd num = Eigen::MatrixXd::Zero(K, K);
    Eigen::MatrixXd den = Eigen::MatrixXd::Zero(K, K);
    for (int i = 0; i < S.size(); ++i)
        for (int j = 0; j < T.size(); ++j) {
            const double p = S.vectors.row(i).dot(T.vectors.row(j));
            num(S.labels[i], T.labels[j]) += A(i, j) * p;
            den(S.labels[i], T.labels[j]) += p * p;
        }
    for (int u = 0; u < K; ++u)
        for (int v = 0; v < K; ++v)
            theta(u, v) = den(u, v) > 0.0
                              ? std::clamp(num(u, v) / den(u, v), 0.0, 1.0)
                              : 0.0;
}

}  // namespace

DotProductFit fit_dot_product_model(const Eigen::MatrixXd& A, int K, int d,
                                    ModelFamily family, std::uint64_t seed,
                                    int max_iters) {
    if (family == ModelFamily::Blockmodel)
        throw std::invalid_argument("fit_dot_product_model: use fit_blockmodel_als for family 1");
    if (family == ModelFamily::DegreeCorrected && d != 1)
        throw std::invalid_argument("fit_dot_product_model: family 2 requires d = 1");
    if (family == ModelFamily::DotProduct && K != 1)
        throw std::invalid_argument("fit_dot_product_model: family 3 requires K = 1");
    if (d < 1) throw std::invalid_argument("fit_dot_product_model: d must be >= 1");
    const int m = static_cast<int>(A.rows());
    const int n = static_cast<int>(A.cols());

    DotProductFit fit;
    fit.row.K = fit.col.K = K;
    fit.row.d = fit.col.d = d;
    if (K > 1) {
        const CoClusterLabels sp = spectral_cocluster(A, K, seed);
        fit.row.labels = sp.S;
        fit.col.labels = sp.T;
    } else {
        fit.row.labels.assign(m, 0);
        fit.col.labels.assign(n, 0);
    }
    SplitRng rng(derive_seed(seed, {0xd0u}));
    fit.row.vectors.resize(m, d);
    fit.col.vectors.resize(n, d);
    for (int i = 0; i < m; ++i) {
        Eigen::VectorXd v(d);
        for (int k = 0; k < d; ++k) v(k) = 0.25 + 0.5 * rng.next_double();
        fit.row.vectors.row(i) = project_to_domain(v).transpose();
    }
    for (int j = 0; j < n; ++j) {
        Eigen::VectorXd v(d);
        for (int k = 0; k < d; ++k) v(k) = 0.25 + 0.5 * rng.next_double();
        fit.col.vectors.row(j) = project_to_domain(v).transpose();
    }
    fit.theta = (family == ModelFamily::DotProduct)
                    ? Eigen::MatrixXd::Ones(1, 1)
                    : Eigen::MatrixXd::Constant(K, K, 0.5);

    const Eigen::MatrixXd At = A.transpose();
    fit.risk_trace.push_back(empirical_risk(A, fit.row, fit.col, fit.theta, family));
    for (int it = 0; it < max_iters; ++it) {
        update_theta(A, fit.row, fit.col, fit.theta, family);
        update_vectors(A, fit.row, fit.col, fit.theta, family);
        {
            // Column updates reuse the row code on the transpose; theta is
            // transposed to keep (row label, column label) order.
            Theta tt = fit.theta.transpose();
            update_vectors(At, fit.col, fit.row, tt, family);
            update_labels(At, fit.col, fit.row, tt, family);
        }
        update_labels(A, fit.row, fit.col, fit.theta, family);
        const double r = empirical_risk(A, fit.row, fit.col, fit.theta, family);
        const double prev = fit.risk_trace.back();
        fit.risk_trace.push_back(r);
        if (prev - r < 1e-12) break;
    }
    return fit;
}

}  // namespace coblock
