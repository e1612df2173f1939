#pragma once
// Profile vectors, support functions, Hausdorff estimation over sampled
// directions, epsilon-covers of the latent domain, latent quantization,
// and the CDF distance between latent assignments.

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "coblock/cocluster.hpp"
#include "coblock/graphon.hpp"
#include "coblock/population.hpp"

namespace coblock {

// K stacked blocks sharing per-coordinate inner-product weights, plus a
// K-vector of class proportions. Norms and inner products use the
// weighted inner product on the blocks and the plain one on pi.
struct ProfileVector {
    Eigen::MatrixXd blocks;         // K x dim
    Eigen::VectorXd coord_weights;  // dim
    Eigen::VectorXd pi;             // K

    double squared_norm() const;
    double norm() const;
    double squared_distance(const ProfileVector& other) const;
};

// G_T from a conditional-mean matrix and column labels.
ProfileVector profile_empirical_col(const Eigen::MatrixXd& W,
                                    const std::vector<int>& T, int K);
// G_tau from a graphon, sampled row coordinates, and a column allocation.
ProfileVector profile_population_col(const StepGraphon& g,
                                     const std::vector<double>& x,
                                     const AllocationMap& col_alloc);
// F_S from a graphon, sampled row coordinates, and row labels.
ProfileVector profile_empirical_row(const StepGraphon& g,
                                    const std::vector<double>& x,
                                    const std::vector<int>& S, int K);
// F_sigma from a graphon and a row allocation.
ProfileVector profile_population_row(const StepGraphon& g,
                                     const AllocationMap& row_alloc);

// A finite family of weighted atoms; the support function of the profile
// set is Gamma(H) = sum_j wt_j max_k (<h_k, atom_j>_w + pi_H(k)).
struct SupportContext {
    Eigen::MatrixXd atoms;          // n_atoms x dim
    Eigen::VectorXd atom_weights;   // n_atoms, sums to 1
    Eigen::VectorXd coord_weights;  // dim
};

SupportContext support_context_empirical_col(const Eigen::MatrixXd& W);
SupportContext support_context_population_col(const StepGraphon& g,
                                              const std::vector<double>& x);
SupportContext support_context_empirical_row(const StepGraphon& g,
                                             const std::vector<double>& x);
SupportContext support_context_population_row(const StepGraphon& g);

double support_function(const SupportContext& ctx, const Eigen::MatrixXd& h,
                        const Eigen::VectorXd& pi_h);

// Max over sampled unit directions (random on the sphere plus all signed
// coordinate axes) of |Gamma_1 - Gamma_2|; a lower bound on the Hausdorff
// distance between the convex hulls.
double hausdorff_estimate(const SupportContext& a, const SupportContext& b,
                          int K, int n_directions, std::uint64_t seed);

struct EpsilonCover {
    double epsilon = 0.0;
    int d = 0;
    Eigen::MatrixXd points;  // n_points x d, all inside D

    int size() const { return static_cast<int>(points.rows()); }
};

// Axis-aligned grid of cell midpoints with per-axis count ceil(sqrt(d)/eps),
// each point projected onto the unit ball. Meets the size bound
// |points| <= ceil(sqrt(d)/eps)^d and covers D at radius eps.
EpsilonCover epsilon_cover(int d, double eps);

struct QuantizedLatent {
    GeneralLatent latent;
    std::vector<int> cover_index;  // per element, index into the cover
};

// Nearest cover point per vector, ties to the lowest index; labels kept.
QuantizedLatent quantize_latents_indexed(const GeneralLatent& latents,
                                         const EpsilonCover& cover);
GeneralLatent quantize_latents(const GeneralLatent& latents,
                               const EpsilonCover& cover);

// Kernel table over quantized classes (class = label * |cover| + point).
Eigen::MatrixXd quantized_theta(const Theta& theta, const EpsilonCover& cover,
                                ModelFamily family);

// Weighted point-mass view of a latent assignment, shared by empirical
// latents and piecewise-constant population maps.
struct LatentDistribution {
    Eigen::VectorXd weights;
    std::vector<int> labels;
    Eigen::MatrixXd vectors;
    int K = 1;
    int d = 0;
};

LatentDistribution latent_distribution(const GeneralLatent& latents);
LatentDistribution latent_distribution(const PopulationLatentMap& map);

// Squared L2 distance between the CDFs Psi_1 and Psi_2 over
// [K] x [0,1)^d: counting measure on labels, midpoint quadrature with the
// stated per-axis resolution on the cube. Quadrature slack is bounded by
// 2 K d / resolution. d = 0 reduces to the label-CDF squared distance.
double psi_cdf_distance(const LatentDistribution& a, const LatentDistribution& b,
                        int grid_resolution);

}  // namespace coblock
