#include "coblock/population.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace coblock {

namespace {

constexpr double kGridTol = 1e-13;

// Walks two interval grids over [0,1] in lockstep and reports every
// intersection with positive length plus the source indices.
struct MergedInterval {
    double len;
    int a;  // index into first grid
    int b;  // index into second grid
};

std::vector<MergedInterval> merge_grids(const std::vector<double>& ba,
                                        const std::vector<double>& bb) {
    std::vector<MergedInterval> out;
    std::size_t ia = 0, ib = 0;
    double cur = 0.0;
    while (ia + 1 < ba.size() && ib + 1 < bb.size()) {
        const double ea = ba[ia + 1];
        const double eb = bb[ib + 1];
        const double nxt = std::min(ea, eb);
        if (nxt - cur > kGridTol)
            out.push_back({nxt - cur, static_cast<int>(ia), static_cast<int>(ib)});
        if (ea <= nxt + kGridTol) ++ia;
        if (eb <= nxt + kGridTol) ++ib;
        cur = nxt;
    }
    return out;
}

double kernel_of(int u, const Eigen::VectorXd& b, int v, const Eigen::VectorXd& d,
                 const Theta& theta, ModelFamily family) {
    return model_kernel(u, b, v, d, theta, family);
}

void check_alloc_matches_axis(const AllocationMap& alloc,
                              const std::vector<double>& breaks,
                              const char* what) {
    if (alloc.n_cells() != static_cast<int>(breaks.size()) - 1)
        throw std::invalid_argument(std::string(what) +
                                    ": allocation cell count does not match graphon axis");
    for (int l = 0; l < alloc.n_cells(); ++l)
        if (std::abs(alloc.cell_lengths(l) - (breaks[l + 1] - breaks[l])) > 1e-9)
            throw std::invalid_argument(std::string(what) +
                                        ": allocation cell lengths do not match graphon axis");
}

}  // namespace

void AllocationMap::validate(double tol) const {
    if (mass.rows() != cell_lengths.size())
        throw std::invalid_argument("AllocationMap: mass rows != cell count");
    if (std::abs(cell_lengths.sum() - 1.0) > tol)
        throw std::invalid_argument("AllocationMap: cell lengths must sum to 1");
    for (int l = 0; l < n_cells(); ++l) {
        if (cell_lengths(l) <= 0.0)
            throw std::invalid_argument("AllocationMap: nonpositive cell length");
        double row = 0.0;
        for (int k = 0; k < K(); ++k) {
            if (mass(l, k) < -tol)
                throw std::invalid_argument("AllocationMap: negative mass entry");
            row += mass(l, k);
        }
        if (std::abs(row - cell_lengths(l)) > tol)
            throw std::invalid_argument("AllocationMap: row mass does not sum to cell length");
    }
}

int PopulationLatentMap::interval_at(double v) const {
    if (v < 0.0 || v > 1.0)
        throw std::invalid_argument("PopulationLatentMap: coordinate outside [0,1]");
    if (v >= 1.0) return n_intervals() - 1;
    auto it = std::upper_bound(breaks.begin(), breaks.end(), v);
    return static_cast<int>(it - breaks.begin()) - 1;
}

PopulationLatentMap latent_map_from_allocation(
    const AllocationMap& alloc, const std::vector<int>& class_labels,
    const Eigen::MatrixXd& class_vectors, int K, int d) {
    if (static_cast<int>(class_labels.size()) != alloc.K())
        throw std::invalid_argument("latent_map_from_allocation: class table size mismatch");
    const auto pieces = realize_partition(alloc);
    PopulationLatentMap map;
    map.K = K;
    map.d = d;
    map.breaks.push_back(0.0);
    map.vectors.resize(static_cast<Eigen::Index>(pieces.size()), d);
    int idx = 0;
    for (const auto& p : pieces) {
        map.breaks.push_back(p.hi);
        map.labels.push_back(class_labels[p.label]);
        if (d > 0) map.vectors.row(idx) = class_vectors.row(p.label);
        ++idx;
    }
    map.breaks.back() = 1.0;
    return map;
}

BlockedGraphon blocked_graphon(const StepGraphon& g, const AllocationMap& row_alloc,
                               const AllocationMap& col_alloc) {
    row_alloc.validate();
    col_alloc.validate();
    check_alloc_matches_axis(row_alloc, g.row_breaks, "blocked_graphon row");
    check_alloc_matches_axis(col_alloc, g.col_breaks, "blocked_graphon column");
    BlockedGraphon out;
    out.phi = row_alloc.mass.transpose() * g.values * col_alloc.mass;
    out.pi_row = row_alloc.pi();
    out.pi_col = col_alloc.pi();
    return out;
}

Eigen::MatrixXd blocked_graphon_mixed(const StepGraphon& g,
                                      const std::vector<double>& x,
                                      const std::vector<int>& S, int K,
                                      const AllocationMap& col_alloc) {
    if (x.size() != S.size())
        throw std::invalid_argument("blocked_graphon_mixed: x and S length mismatch");
    col_alloc.validate();
    check_alloc_matches_axis(col_alloc, g.col_breaks, "blocked_graphon_mixed column");
    const int m = static_cast<int>(x.size());
    // row_sums(a,t) = sum_b values(a,b) mass(b,t)
    Eigen::MatrixXd vrow = g.values * col_alloc.mass;  // Lx x Kcol
    Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(K, col_alloc.K());
    for (int i = 0; i < m; ++i) {
        if (S[i] < 0 || S[i] >= K)
            throw std::invalid_argument("blocked_graphon_mixed: label outside [0,K)");
        phi.row(S[i]) += vrow.row(g.row_cell(x[i]));
    }
    return phi / m;
}

double population_risk(const StepGraphon& g, const PopulationLatentMap& sigma,
                       const PopulationLatentMap& tau, const Theta& theta,
                       ModelFamily family) {
    const auto rows = merge_grids(g.row_breaks, sigma.breaks);
    const auto cols = merge_grids(g.col_breaks, tau.breaks);
    double acc = 0.0;
    for (const auto& r : rows) {
        for (const auto& c : cols) {
            const double w = g.values(r.a, c.a);
            const double k =
                kernel_of(sigma.labels[r.b], sigma.vectors.row(r.b).transpose(),
                          tau.labels[c.b], tau.vectors.row(c.b).transpose(), theta,
                          family);
            const double diff = w - k;
            acc += r.len * c.len * diff * diff;
        }
    }
    return acc;
}

double population_risk_mixed(const StepGraphon& g, const std::vector<double>& x,
                             const GeneralLatent& S, const PopulationLatentMap& tau,
                             const Theta& theta, ModelFamily family) {
    if (static_cast<int>(x.size()) != S.size())
        throw std::invalid_argument("population_risk_mixed: x and S length mismatch");
    const auto cols = merge_grids(g.col_breaks, tau.breaks);
    const int m = static_cast<int>(x.size());
    double acc = 0.0;
    for (int i = 0; i < m; ++i) {
        const int a = g.row_cell(x[i]);
        for (const auto& c : cols) {
            const double w = g.values(a, c.a);
            const double k = kernel_of(S.labels[i], S.vectors.row(i).transpose(),
                                       tau.labels[c.b], tau.vectors.row(c.b).transpose(),
                                       theta, family);
            const double diff = w - k;
            acc += c.len * diff * diff;
        }
    }
    return acc / m;
}

int greedy_sigma_star(const StepGraphon& g, const PopulationLatentMap& tau,
                      const Theta& theta, ModelFamily family, double x,
                      const Eigen::VectorXd& row_vec) {
    const int K = static_cast<int>(theta.rows());
    const auto cols = merge_grids(g.col_breaks, tau.breaks);
    const int a = g.row_cell(x);
    int best = 0;
    double best_val = std::numeric_limits<double>::infinity();
    for (int s = 0; s < K; ++s) {
        double acc = 0.0;
        for (const auto& c : cols) {
            const double w = g.values(a, c.a);
            const double k = kernel_of(s, row_vec, tau.labels[c.b],
                                       tau.vectors.row(c.b).transpose(), theta, family);
            const double diff = w - k;
            acc += c.len * diff * diff;
        }
        if (acc < best_val - 1e-15) {
            best_val = acc;
            best = s;
        }
    }
    return best;
}

double AllocationQP::value(const Eigen::MatrixXd& M) const {
    const Eigen::MatrixXd P = C * M;
    double acc = base;
    for (Eigen::Index r = 0; r < P.rows(); ++r)
        for (Eigen::Index k = 0; k < P.cols(); ++k)
            acc += row_weight(r) * P(r, k) * P(r, k) - 2.0 * lin(r, k) * P(r, k);
    const Eigen::VectorXd q = M.colwise().sum().transpose() - pi_target;
    return acc + q.squaredNorm();
}

Eigen::MatrixXd AllocationQP::gradient(const Eigen::MatrixXd& M) const {
    const Eigen::MatrixXd P = C * M;
    Eigen::MatrixXd G =
        2.0 * C.transpose() * (row_weight.asDiagonal() * P - lin);
    const Eigen::RowVectorXd q =
        2.0 * (M.colwise().sum() - pi_target.transpose());
    G.rowwise() += q;
    return G;
}

namespace {

// Euclidean projection onto { v >= 0, sum v = budget }.
Eigen::VectorXd project_scaled_simplex(Eigen::VectorXd z, double budget) {
    const int K = static_cast<int>(z.size());
    std::vector<double> sorted(z.data(), z.data() + K);
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    double cum = 0.0, lambda = (sorted[0] - budget);
    for (int k = 0; k < K; ++k) {
        cum += sorted[k];
        const double cand = (cum - budget) / (k + 1);
        if (k + 1 == K || sorted[k + 1] <= cand) {
            lambda = cand;
            break;
        }
    }
    for (int k = 0; k < K; ++k) z(k) = std::max(z(k) - lambda, 0.0);
    return z;
}

}  // namespace

MatchResult solve_allocation_qp(const AllocationQP& qp, double gap_tol,
                                int max_iters) {
    const int L = static_cast<int>(qp.budgets.size());
    const int K = static_cast<int>(qp.pi_target.size());
    Eigen::MatrixXd M(L, K);
    for (int l = 0; l < L; ++l) M.row(l).setConstant(qp.budgets(l) / K);

    // The objective restricted to one allocation row has an isotropic
    // Hessian h_l * I, so exact per-row minimization is a projection onto
    // the scaled simplex. Cyclic sweeps are monotone; the Frank-Wolfe gap
    // over the product polytope certifies optimality.
    Eigen::VectorXd h(L);
    for (int l = 0; l < L; ++l) {
        double acc = 2.0;  // pi part
        for (Eigen::Index r = 0; r < qp.C.rows(); ++r)
            acc += 2.0 * qp.row_weight(r) * qp.C(r, l) * qp.C(r, l);
        h(l) = acc;
    }

    MatchResult res;
    double gap = std::numeric_limits<double>::infinity();
    int it = 0;
    for (; it < max_iters; ++it) {
        const Eigen::MatrixXd G = qp.gradient(M);
        gap = 0.0;
        for (int l = 0; l < L; ++l) {
            // LP over a scaled simplex: whole budget on the smallest
            // gradient coordinate.
            double gmin = G(l, 0);
            for (int k = 1; k < K; ++k) gmin = std::min(gmin, G(l, k));
            gap += G.row(l).dot(M.row(l)) - qp.budgets(l) * gmin;
        }
        if (gap <= gap_tol) break;

        for (int l = 0; l < L; ++l) {
            // Fresh gradient row: earlier rows in this sweep already moved.
            Eigen::RowVectorXd gl =
                2.0 * qp.C.col(l).transpose() *
                (qp.row_weight.asDiagonal() * (qp.C * M) - qp.lin);
            gl += 2.0 * (M.colwise().sum() - qp.pi_target.transpose());
            const Eigen::VectorXd z = M.row(l).transpose() - gl.transpose() / h(l);
            M.row(l) = project_scaled_simplex(z, qp.budgets(l)).transpose();
        }
    }

    res.alloc.cell_lengths = qp.budgets;
    res.alloc.mass = M;
    res.objective = qp.value(M);
    res.duality_gap = gap;
    res.iterations = it;
    res.converged = gap <= gap_tol;
    return res;
}

MatchResult match_population_cocluster(const StepGraphon& g,
                                       const BipartiteSample& sample,
                                       const std::vector<int>& labels, int K,
                                       Side side, double gap_tol, int max_iters) {
    if (K < 1) throw std::invalid_argument("match_population_cocluster: K must be >= 1");
    const int m = sample.m();
    const int n = sample.n();
    const int Lx = g.n_row_cells();
    const int Ly = g.n_col_cells();

    AllocationQP qp;
    if (side == Side::Column) {
        if (static_cast<int>(labels.size()) != n)
            throw std::invalid_argument("match_population_cocluster: column labels length != n");
        // g_{T=t}(i) = (1/n) sum_j W_ij 1{T_j=t}
        Eigen::MatrixXd ind = Eigen::MatrixXd::Zero(n, K);
        for (int j = 0; j < n; ++j) {
            if (labels[j] < 0 || labels[j] >= K)
                throw std::invalid_argument("match_population_cocluster: label outside [0,K)");
            ind(j, labels[j]) = 1.0;
        }
        const Eigen::MatrixXd gT = sample.W * ind / n;  // m x K
        Eigen::VectorXd counts = Eigen::VectorXd::Zero(Lx);
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(Lx, K);
        for (int i = 0; i < m; ++i) {
            const int a = g.row_cell(sample.x[i]);
            counts(a) += 1.0;
            h.row(a) += gT.row(i);
        }
        qp.C = g.values;  // Lx x Ly
        qp.row_weight = counts / m;
        qp.lin = h / m;
        qp.pi_target = ind.colwise().sum().transpose() / n;
        qp.budgets.resize(Ly);
        for (int b = 0; b < Ly; ++b) qp.budgets(b) = g.col_width(b);
        qp.base = gT.squaredNorm() / m;
    } else {
        if (static_cast<int>(labels.size()) != m)
            throw std::invalid_argument("match_population_cocluster: row labels length != m");
        // f_{S=s} is a step function on the column grid:
        // f_{S=s}(b) = (1/m) sum_i values(cell(x_i), b) 1{S_i=s}
        Eigen::MatrixXd cnt = Eigen::MatrixXd::Zero(Lx, K);
        for (int i = 0; i < m; ++i) {
            if (labels[i] < 0 || labels[i] >= K)
                throw std::invalid_argument("match_population_cocluster: label outside [0,K)");
            cnt(g.row_cell(sample.x[i]), labels[i]) += 1.0;
        }
        const Eigen::MatrixXd fS = g.values.transpose() * cnt / m;  // Ly x K
        Eigen::VectorXd w(Ly);
        for (int b = 0; b < Ly; ++b) w(b) = g.col_width(b);
        qp.C = g.values.transpose();  // Ly x Lx
        qp.row_weight = w;
        qp.lin = w.asDiagonal() * fS;
        qp.pi_target = cnt.colwise().sum().transpose() / m;
        qp.budgets.resize(Lx);
        for (int a = 0; a < Lx; ++a) qp.budgets(a) = g.row_width(a);
        qp.base = (w.asDiagonal() * fS.cwiseProduct(fS)).sum();
    }

    // Stops at the gap tolerance or the sweep cap, whichever first; the
    // caller can inspect `converged` and `duality_gap`.
    return solve_allocation_qp(qp, gap_tol, max_iters);
}

std::vector<PartitionPiece> realize_partition(const AllocationMap& alloc) {
    alloc.validate();
    std::vector<PartitionPiece> pieces;
    double cell_lo = 0.0;
    for (int l = 0; l < alloc.n_cells(); ++l) {
        double cursor = cell_lo;
        for (int k = 0; k < alloc.K(); ++k) {
            const double len = alloc.mass(l, k);
            if (len > 0.0) {
                pieces.push_back({cursor, cursor + len, k});
                cursor += len;
            }
        }
        cell_lo += alloc.cell_lengths(l);
    }
    if (!pieces.empty()) pieces.back().hi = 1.0;
    return pieces;
}

AllocationMap allocation_from_partition(const std::vector<PartitionPiece>& pieces,
                                        const Eigen::VectorXd& cell_lengths, int K) {
    const int L = static_cast<int>(cell_lengths.size());
    std::vector<double> cum(L + 1, 0.0);
    for (int l = 0; l < L; ++l) cum[l + 1] = cum[l] + cell_lengths(l);
    cum[L] = 1.0;
    AllocationMap out;
    out.cell_lengths = cell_lengths;
    out.mass = Eigen::MatrixXd::Zero(L, K);
    for (const auto& p : pieces) {
        // Pieces may straddle cell boundaries only through rounding; split
        // the overlap across all cells it touches.
        for (int l = 0; l < L; ++l) {
            const double lo = std::max(p.lo, cum[l]);
            const double hi = std::min(p.hi, cum[l + 1]);
            if (hi > lo) out.mass(l, p.label) += hi - lo;
        }
    }
    return out;
}

CenteringConstants centering_constants(const BipartiteSample& sample,
                                       const StepGraphon& g) {
    const int m = sample.m();
    const int n = sample.n();
    CenteringConstants c{0.0, 0.0, 0.0};
    c.c1 = (sample.A.sum() - sample.W.cwiseProduct(sample.W).sum()) /
           (static_cast<double>(m) * n);

    // Per-row exact integral of w(x_i, .)^2 over [0,1].
    Eigen::VectorXd wcol(g.n_col_cells());
    for (int b = 0; b < g.n_col_cells(); ++b) wcol(b) = g.col_width(b);
    const Eigen::VectorXd cell_sq = (g.values.cwiseProduct(g.values)) * wcol;  // Lx
    double mean_int = 0.0;
    double mean_emp = 0.0;
    for (int i = 0; i < m; ++i) {
        mean_int += cell_sq(g.row_cell(sample.x[i]));
        mean_emp += sample.W.row(i).squaredNorm() / n;
    }
    mean_int /= m;
    mean_emp /= m;
    c.c2 = mean_emp - mean_int;

    double tot2 = 0.0;  // int int w^2
    for (int a = 0; a < g.n_row_cells(); ++a)
        for (int b = 0; b < g.n_col_cells(); ++b)
            tot2 += g.row_width(a) * g.col_width(b) * g.values(a, b) * g.values(a, b);
    c.c3 = mean_int - tot2;
    return c;
}

std::string write_allocation_map(const AllocationMap& a) {
    std::ostringstream out;
    out << "cell_lengths\n";
    for (int l = 0; l < a.n_cells(); ++l)
        out << format_g17(a.cell_lengths(l)) << (l + 1 < a.n_cells() ? ' ' : '\n');
    out << "mass\n";
    for (int l = 0; l < a.n_cells(); ++l)
        for (int k = 0; k < a.K(); ++k)
            out << format_g17(a.mass(l, k)) << (k + 1 < a.K() ? ' ' : '\n');
    return out.str();
}

AllocationMap read_allocation_map(const std::string& text) {
    std::istringstream in(text);
    std::string tok;
    std::vector<double> lens, mass;
    std::vector<double>* target = nullptr;
    while (in >> tok) {
        if (tok == "cell_lengths") { target = &lens; continue; }
        if (tok == "mass") { target = &mass; continue; }
        if (!target)
            throw std::invalid_argument("allocation text: data before any section header");
        target->push_back(std::stod(tok));
    }
    if (lens.empty() || mass.size() % lens.size() != 0)
        throw std::invalid_argument("allocation text: malformed sections");
    const int L = static_cast<int>(lens.size());
    const int K = static_cast<int>(mass.size() / lens.size());
    AllocationMap out;
    out.cell_lengths = Eigen::Map<Eigen::VectorXd>(lens.data(), L);
    out.mass.resize(L, K);
    for (int l = 0; l < L; ++l)
        for (int k = 0; k < K; ++k) out.mass(l, k) = mass[l * K + k];
    return out;
}

}  // namespace coblock
