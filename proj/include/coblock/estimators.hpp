#pragma once
// Candidate-producing estimators: spectral co-clustering and alternating
// least-squares fits for the four model families.

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "coblock/cocluster.hpp"

namespace coblock {

struct TruncatedSvd {
    Eigen::MatrixXd U;  // m x K
    Eigen::VectorXd s;  // K, nonincreasing
    Eigen::MatrixXd V;  // n x K
};

// Rank-K decomposition by seeded subspace iteration; stops when all
// singular triplets satisfy |A v - s u| <= tol * s_1 or at max_iters.
TruncatedSvd truncated_svd(const Eigen::MatrixXd& A, int K, std::uint64_t seed,
                           double tol = 1e-8, int max_iters = 1000);

// K-means with greedy farthest-point initialization (first center drawn
// from the seed, ties to the lowest index); 0-based labels.
std::vector<int> kmeans_labels(const Eigen::MatrixXd& points, int K,
                               std::uint64_t seed, int max_iters = 100,
                               double move_tol = 1e-10);

// Rows clustered on left singular coordinates scaled by singular values,
// columns on the right; deterministic in the seed.
CoClusterLabels spectral_cocluster(const Eigen::MatrixXd& A, int K,
                                   std::uint64_t seed);

struct BlockmodelFit {
    CoClusterLabels labels;
    Theta theta;
    std::vector<double> risk_trace;  // R_A after each sweep, non-increasing
};

BlockmodelFit fit_blockmodel_als(const Eigen::MatrixXd& A, int K,
                                 const CoClusterLabels& init, int max_iters);

struct DotProductFit {
    GeneralLatent row;
    GeneralLatent col;
    Theta theta;
    std::vector<double> risk_trace;
};

// Alternating minimization for families 2-4: labels by greedy
// reassignment, vectors by least squares projected onto D (clip negatives
// to 0, coordinates to 1 - 1e-9, rescale to unit norm if needed; a row or
// column update is kept only if it does not increase its residual),
// theta by the ratio-of-sums closed form clipped to [0,1].
DotProductFit fit_dot_product_model(const Eigen::MatrixXd& A, int K, int d,
                                    ModelFamily family, std::uint64_t seed,
                                    int max_iters);

// Projection onto D used by the fitters.
Eigen::VectorXd project_to_domain(Eigen::VectorXd v);

}  // namespace coblock
