#pragma once
// Empirical block quantities for a co-clustering (phi matrix, cluster
// proportions, density matrix) and the squared-error risk for the four
// bipartite model families.

#include <Eigen/Dense>
#include <vector>

namespace coblock {

// Labels are 0-based: values in {0, ..., K-1}.
struct CoClusterLabels {
    std::vector<int> S;  // length m
    std::vector<int> T;  // length n
    int K = 1;
};

struct BlockSummary {
    Eigen::MatrixXd phi;        // K x K, sums to mean(M)
    Eigen::VectorXd pi_row;     // K, sums to 1
    Eigen::VectorXd pi_col;     // K, sums to 1
    Eigen::MatrixXd theta_hat;  // K x K; 0 where a block is empty
};

BlockSummary block_summary(const Eigen::MatrixXd& M, const CoClusterLabels& labels);

enum class ModelFamily : int {
    Blockmodel = 1,       // theta_{uv}
    DegreeCorrected = 2,  // b d theta_{uv}, scalar degree parameters
    DotProduct = 3,       // b . d
    DotProductBlock = 4,  // (b . d) theta_{uv}
};

ModelFamily model_family_from_int(int id);

// Latent assignment for the dot-product + blockmodel family: a label in
// {0,...,K-1} plus a vector in D = { c in [0,1)^d : |c| <= 1 }.
// Family 1 uses d = 0 (vectors has 0 columns); family 3 ignores labels.
struct GeneralLatent {
    std::vector<int> labels;
    Eigen::MatrixXd vectors;  // size x d
    int K = 1;
    int d = 0;

    int size() const { return static_cast<int>(labels.size()); }
};

using Theta = Eigen::MatrixXd;  // K x K, entries in [0,1]

// Checks membership in D; throws if violated.
void check_in_domain(const Eigen::VectorXd& v);

double model_kernel(int u, const Eigen::VectorXd& b, int v,
                    const Eigen::VectorXd& dvec, const Theta& theta,
                    ModelFamily family);

// Kernel value between the i-th row latent and j-th column latent.
double model_kernel_at(const GeneralLatent& S, int i, const GeneralLatent& T,
                       int j, const Theta& theta, ModelFamily family);

// R_A = (1/mn) sum_ij (A_ij - kernel(S_i, T_j))^2.
double empirical_risk(const Eigen::MatrixXd& A, const GeneralLatent& S,
                      const GeneralLatent& T, const Theta& theta,
                      ModelFamily family);

// Blockmodel labels as a degenerate GeneralLatent (d = 0).
GeneralLatent latent_from_labels(const std::vector<int>& labels, int K);

}  // namespace coblock
