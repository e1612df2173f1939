#pragma once
// Exact population quantities for step graphons: blocked graphons,
// population risks, the greedy optimal partition, the matching that
// realizes population co-clusters from sampled labels, and the additive
// centering constants used to align empirical and population risks.

#include <Eigen/Dense>
#include <string>
#include <tuple>
#include <vector>

#include "coblock/cocluster.hpp"
#include "coblock/graphon.hpp"

namespace coblock {

// Fractional assignment of one axis's cell measure across K labels.
// Row l of mass sums to cell_lengths[l]; column sums give pi.
struct AllocationMap {
    Eigen::VectorXd cell_lengths;  // L, positive, sums to 1
    Eigen::MatrixXd mass;          // L x K, nonnegative

    int n_cells() const { return static_cast<int>(mass.rows()); }
    int K() const { return static_cast<int>(mass.cols()); }
    Eigen::VectorXd pi() const { return mass.colwise().sum().transpose(); }
    void validate(double tol = 1e-10) const;
};

// Piecewise-constant latent map [0,1] -> [K] x D. Interval i is
// [breaks[i], breaks[i+1]) with label labels[i] and vector vectors.row(i).
struct PopulationLatentMap {
    std::vector<double> breaks;  // length L+1, 0 first, 1 last
    std::vector<int> labels;     // length L
    Eigen::MatrixXd vectors;     // L x d (d may be 0)
    int K = 1;
    int d = 0;

    int n_intervals() const { return static_cast<int>(labels.size()); }
    int interval_at(double v) const;
};

// Label-only map built from realized AllocationMap intervals.
PopulationLatentMap latent_map_from_allocation(
    const AllocationMap& alloc, const std::vector<int>& class_labels,
    const Eigen::MatrixXd& class_vectors, int K, int d);

struct BlockedGraphon {
    Eigen::MatrixXd phi;     // K x K
    Eigen::VectorXd pi_row;  // K
    Eigen::VectorXd pi_col;  // K
};

// phi[s][t] = sum_ab values(a,b) row_mass(a,s) col_mass(b,t); exact.
BlockedGraphon blocked_graphon(const StepGraphon& g, const AllocationMap& row_alloc,
                               const AllocationMap& col_alloc);

// Phi_w(S, tau): rows are sampled points with labels, columns an allocation.
Eigen::MatrixXd blocked_graphon_mixed(const StepGraphon& g,
                                      const std::vector<double>& x,
                                      const std::vector<int>& S, int K,
                                      const AllocationMap& col_alloc);

// Integral of (w - kernel(sigma, tau))^2 over [0,1]^2, exact cell sums.
double population_risk(const StepGraphon& g, const PopulationLatentMap& sigma,
                       const PopulationLatentMap& tau, const Theta& theta,
                       ModelFamily family);

// (1/m) sum_i integral_y (w(x_i,y) - kernel(S_i, tau(y)))^2 dy.
double population_risk_mixed(const StepGraphon& g, const std::vector<double>& x,
                             const GeneralLatent& S, const PopulationLatentMap& tau,
                             const Theta& theta, ModelFamily family);

// argmin over labels s of integral (w(x,y) - kernel(s, tau(y)))^2 dy.
// row_vec supplies the row latent vector for families 2-4; ties go to the
// smallest label.
int greedy_sigma_star(const StepGraphon& g, const PopulationLatentMap& tau,
                      const Theta& theta, ModelFamily family, double x,
                      const Eigen::VectorXd& row_vec = Eigen::VectorXd());

enum class Side { Row, Column };

struct MatchResult {
    AllocationMap alloc;
    double objective = 0.0;    // ||G_T - G_tau||^2 (or row analogue) at optimum
    double duality_gap = 0.0;  // Frank-Wolfe gap certificate at exit
    int iterations = 0;
    bool converged = false;
};

// Finds the AllocationMap minimizing ||G_T - G_tau||^2 (column side) or
// ||F_S - F_sigma||^2 (row side): a convex QP over a product of scaled
// simplices, solved by cyclic exact per-row minimization (each row
// subproblem is a simplex projection) and certified by the Frank-Wolfe
// duality gap. Stops at gap <= gap_tol or after max_iters sweeps.
MatchResult match_population_cocluster(const StepGraphon& g,
                                       const BipartiteSample& sample,
                                       const std::vector<int>& labels, int K,
                                       Side side, double gap_tol = 1e-8,
                                       int max_iters = 50000);

struct PartitionPiece {
    double lo, hi;
    int label;
};

// Deterministic left-to-right subdivision of each cell into consecutive
// label subintervals; zero-mass pieces are omitted.
std::vector<PartitionPiece> realize_partition(const AllocationMap& alloc);

// AllocationMap recomputed from realized intervals on the same cell grid.
AllocationMap allocation_from_partition(const std::vector<PartitionPiece>& pieces,
                                        const Eigen::VectorXd& cell_lengths, int K);

struct CenteringConstants {
    double c1;  // from R_A - R_W        : (1/mn) sum (A_ij - W_ij^2)
    double c2;  // from R_W - R_w        : (1/m) sum_i [(1/n) sum_j W_ij^2 - int w(x_i,y)^2 dy]
    double c3;  // row-side analogue     : (1/m) sum_i int w(x_i,y)^2 dy - int int w^2
};

CenteringConstants centering_constants(const BipartiteSample& sample,
                                       const StepGraphon& g);

// AllocationMap serialization: sections cell_lengths / mass, same
// whitespace-separated 17-digit format as StepGraphon.
std::string write_allocation_map(const AllocationMap& a);
AllocationMap read_allocation_map(const std::string& text);

// Internal QP form shared by both matching sides; exposed for tests.
struct AllocationQP {
    Eigen::MatrixXd C;           // R x L, maps allocation rows to residual rows
    Eigen::VectorXd row_weight;  // R
    Eigen::MatrixXd lin;         // R x K linear coefficients
    Eigen::VectorXd pi_target;   // K
    Eigen::VectorXd budgets;     // L, per-row mass budget
    double base = 0.0;

    double value(const Eigen::MatrixXd& M) const;
    Eigen::MatrixXd gradient(const Eigen::MatrixXd& M) const;
};

MatchResult solve_allocation_qp(const AllocationQP& qp, double gap_tol,
                                int max_iters);

}  // namespace coblock
