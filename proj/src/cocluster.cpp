#include "coblock/cocluster.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace coblock {

namespace {
constexpr double kDomainTol = 1e-12;

void check_labels(const std::vector<int>& labels, int K, const char* name) {
    for (int v : labels)
        if (v < 0 || v >= K)
            throw std::invalid_argument(std::string(name) + ": label outside [0,K)");
}
}  // namespace

BlockSummary block_summary(const Eigen::MatrixXd& M, const CoClusterLabels& labels) {
    const int m = static_cast<int>(M.rows());
    const int n = static_cast<int>(M.cols());
    const int K = labels.K;
    if (K < 1) throw std::invalid_argument("block_summary: K must be >= 1");
    if (static_cast<int>(labels.S.size()) != m || static_cast<int>(labels.T.size()) != n)
        throw std::invalid_argument("block_summary: label lengths do not match matrix shape");
    check_labels(labels.S, K, "block_summary S");
    check_labels(labels.T, K, "block_summary T");

    BlockSummary out;
    out.phi = Eigen::MatrixXd::Zero(K, K);
    out.pi_row = Eigen::VectorXd::Zero(K);
    out.pi_col = Eigen::VectorXd::Zero(K);
    for (int i = 0; i < m; ++i) out.pi_row(labels.S[i]) += 1.0;
    for (int j = 0; j < n; ++j) out.pi_col(labels.T[j]) += 1.0;
    out.pi_row /= m;
    out.pi_col /= n;

    for (int j = 0; j < n; ++j) {
        const int t = labels.T[j];
        for (int i = 0; i < m; ++i) out.phi(labels.S[i], t) += M(i, j);
    }
    out.phi /= static_cast<double>(m) * n;

    out.theta_hat = Eigen::MatrixXd::Zero(K, K);
    for (int s = 0; s < K; ++s)
        for (int t = 0; t < K; ++t) {
            const double w = out.pi_row(s) * out.pi_col(t);
            if (w > 0.0) out.theta_hat(s, t) = out.phi(s, t) / w;
        }
    return out;
}

ModelFamily model_family_from_int(int id) {
    if (id < 1 || id > 4)
        throw std::invalid_argument("model family id must be in 1..4");
    return static_cast<ModelFamily>(id);
}

void check_in_domain(const Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (v(i) < 0.0 || v(i) >= 1.0)
            throw std::invalid_argument("latent vector coordinate outside [0,1)");
    if (v.norm() > 1.0 + kDomainTol)
        throw std::invalid_argument("latent vector norm exceeds 1");
}

double model_kernel(int u, const Eigen::VectorXd& b, int v,
                    const Eigen::VectorXd& dvec, const Theta& theta,
                    ModelFamily family) {
    switch (family) {
        case ModelFamily::Blockmodel: {
            if (u < 0 || u >= theta.rows() || v < 0 || v >= theta.cols())
                throw std::invalid_argument("model_kernel: label outside [0,K)");
            return theta(u, v);
        }
        case ModelFamily::DegreeCorrected: {
            if (b.size() != 1 || dvec.size() != 1)
                throw std::invalid_argument("model_kernel: family 2 requires scalar degree parameters");
            check_in_domain(b);
            check_in_domain(dvec);
            if (u < 0 || u >= theta.rows() || v < 0 || v >= theta.cols())
                throw std::invalid_argument("model_kernel: label outside [0,K)");
            return b(0) * dvec(0) * theta(u, v);
        }
        case ModelFamily::DotProduct: {
            if (b.size() != dvec.size() || b.size() == 0)
                throw std::invalid_argument("model_kernel: family 3 requires matching d >= 1");
            check_in_domain(b);
            check_in_domain(dvec);
            return b.dot(dvec);
        }
        case ModelFamily::DotProductBlock: {
            if (b.size() != dvec.size() || b.size() == 0)
                throw std::invalid_argument("model_kernel: family 4 requires matching d >= 1");
            check_in_domain(b);
            check_in_domain(dvec);
            if (u < 0 || u >= theta.rows() || v < 0 || v >= theta.cols())
                throw std::invalid_argument("model_kernel: label outside [0,K)");
            return b.dot(dvec) * theta(u, v);
        }
    }
    throw std::invalid_argument("model_kernel: unknown family");
}

double model_kernel_at(const GeneralLatent& S, int i, const GeneralLatent& T,
                       int j, const Theta& theta, ModelFamily family) {
    static const Eigen::VectorXd kEmpty;
    if (family == ModelFamily::Blockmodel)
        return model_kernel(S.labels[i], kEmpty, T.labels[j], kEmpty, theta, family);
    return model_kernel(S.labels[i], S.vectors.row(i).transpose(), T.labels[j],
                        T.vectors.row(j).transpose(), theta, family);
}

double empirical_risk(const Eigen::MatrixXd& A, const GeneralLatent& S,
                      const GeneralLatent& T, const Theta& theta,
                      ModelFamily family) {
    const int m = static_cast<int>(A.rows());
    const int n = static_cast<int>(A.cols());
    if (S.size() != m || T.size() != n)
        throw std::invalid_argument("empirical_risk: latent lengths do not match A");
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < m; ++i) {
            const double w = model_kernel_at(S, i, T, j, theta, family);
            const double r = A(i, j) - w;
            acc += r * r;
        }
    }
    return acc / (static_cast<double>(m) * n);
}

GeneralLatent latent_from_labels(const std::vector<int>& labels, int K) {
    GeneralLatent g;
    g.labels = labels;
    g.K = K;
    g.d = 0;
    g.vectors.resize(static_cast<Eigen::Index>(labels.size()), 0);
    return g;
}

}  // namespace coblock
