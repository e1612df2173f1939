#include "coblock/geometry.hpp"
#include "coblock/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace coblock {

double ProfileVector::squared_norm() const {
    double acc = pi.squaredNorm();
    for (Eigen::Index k = 0; k < blocks.rows(); ++k)
        acc += blocks.row(k).cwiseProduct(blocks.row(k)).dot(coord_weights.transpose());
    return acc;
}

double ProfileVector::norm() const { return std::sqrt(squared_norm()); }

double ProfileVector::squared_distance(const ProfileVector& other) const {
    if (blocks.rows() != other.blocks.rows() || blocks.cols() != other.blocks.cols())
        throw std::invalid_argument("ProfileVector: shape mismatch");
    double acc = (pi - other.pi).squaredNorm();
    const Eigen::MatrixXd diff = blocks - other.blocks;
    for (Eigen::Index k = 0; k < diff.rows(); ++k)
        acc += diff.row(k).cwiseProduct(diff.row(k)).dot(coord_weights.transpose());
    return acc;
}

ProfileVector profile_empirical_col(const Eigen::MatrixXd& W,
                                    const std::vector<int>& T, int K) {
    const int m = static_cast<int>(W.rows());
    const int n = static_cast<int>(W.cols());
    if (static_cast<int>(T.size()) != n)
        throw std::invalid_argument("profile_empirical_col: label length != n");
    ProfileVector p;
    p.blocks = Eigen::MatrixXd::Zero(K, m);
    p.pi = Eigen::VectorXd::Zero(K);
    for (int j = 0; j < n; ++j) {
        if (T[j] < 0 || T[j] >= K)
            throw std::invalid_argument("profile_empirical_col: label outside [0,K)");
        p.blocks.row(T[j]) += W.col(j).transpose();
        p.pi(T[j]) += 1.0;
    }
    p.blocks /= n * std::sqrt(static_cast<double>(m));
    p.pi /= n;
    p.coord_weights = Eigen::VectorXd::Ones(m);
    return p;
}

ProfileVector profile_population_col(const StepGraphon& g,
                                     const std::vector<double>& x,
                                     const AllocationMap& col_alloc) {
    col_alloc.validate();
    const int m = static_cast<int>(x.size());
    const int K = col_alloc.K();
    const Eigen::MatrixXd vrow = g.values * col_alloc.mass;  // Lx x K
    ProfileVector p;
    p.blocks.resize(K, m);
    for (int i = 0; i < m; ++i)
        p.blocks.col(i) = vrow.row(g.row_cell(x[i])).transpose();
    p.blocks /= std::sqrt(static_cast<double>(m));
    p.pi = col_alloc.pi();
    p.coord_weights = Eigen::VectorXd::Ones(m);
    return p;
}

ProfileVector profile_empirical_row(const StepGraphon& g,
                                    const std::vector<double>& x,
                                    const std::vector<int>& S, int K) {
    if (x.size() != S.size())
        throw std::invalid_argument("profile_empirical_row: x and S length mismatch");
    const int m = static_cast<int>(x.size());
    const int Ly = g.n_col_cells();
    Eigen::MatrixXd cnt = Eigen::MatrixXd::Zero(K, g.n_row_cells());
    Eigen::VectorXd pi = Eigen::VectorXd::Zero(K);
    for (int i = 0; i < m; ++i) {
        if (S[i] < 0 || S[i] >= K)
            throw std::invalid_argument("profile_empirical_row: label outside [0,K)");
        cnt(S[i], g.row_cell(x[i])) += 1.0;
        pi(S[i]) += 1.0;
    }
    ProfileVector p;
    p.blocks = cnt * g.values / m;  // K x Ly
    p.pi = pi / m;
    p.coord_weights.resize(Ly);
    for (int b = 0; b < Ly; ++b) p.coord_weights(b) = g.col_width(b);
    return p;
}

ProfileVector profile_population_row(const StepGraphon& g,
                                     const AllocationMap& row_alloc) {
    row_alloc.validate();
    const int Ly = g.n_col_cells();
    ProfileVector p;
    p.blocks = row_alloc.mass.transpose() * g.values;  // K x Ly
    p.pi = row_alloc.pi();
    p.coord_weights.resize(Ly);
    for (int b = 0; b < Ly; ++b) p.coord_weights(b) = g.col_width(b);
    return p;
}

SupportContext support_context_empirical_col(const Eigen::MatrixXd& W) {
    const int m = static_cast<int>(W.rows());
    const int n = static_cast<int>(W.cols());
    SupportContext c;
    c.atoms = W.transpose() / std::sqrt(static_cast<double>(m));  // n x m
    c.atom_weights = Eigen::VectorXd::Constant(n, 1.0 / n);
    c.coord_weights = Eigen::VectorXd::Ones(m);
    return c;
}

SupportContext support_context_population_col(const StepGraphon& g,
                                              const std::vector<double>& x) {
    const int m = static_cast<int>(x.size());
    const int Ly = g.n_col_cells();
    SupportContext c;
    c.atoms.resize(Ly, m);
    c.atom_weights.resize(Ly);
    for (int b = 0; b < Ly; ++b) {
        for (int i = 0; i < m; ++i)
            c.atoms(b, i) = g.values(g.row_cell(x[i]), b);
        c.atom_weights(b) = g.col_width(b);
    }
    c.atoms /= std::sqrt(static_cast<double>(m));
    c.coord_weights = Eigen::VectorXd::Ones(m);
    return c;
}

SupportContext support_context_empirical_row(const StepGraphon& g,
                                             const std::vector<double>& x) {
    const int m = static_cast<int>(x.size());
    const int Ly = g.n_col_cells();
    SupportContext c;
    c.atoms.resize(m, Ly);
    for (int i = 0; i < m; ++i)
        c.atoms.row(i) = g.values.row(g.row_cell(x[i]));
    c.atom_weights = Eigen::VectorXd::Constant(m, 1.0 / m);
    c.coord_weights.resize(Ly);
    for (int b = 0; b < Ly; ++b) c.coord_weights(b) = g.col_width(b);
    return c;
}

SupportContext support_context_population_row(const StepGraphon& g) {
    const int Lx = g.n_row_cells();
    const int Ly = g.n_col_cells();
    SupportContext c;
    c.atoms = g.values;
    c.atom_weights.resize(Lx);
    for (int a = 0; a < Lx; ++a) c.atom_weights(a) = g.row_width(a);
    c.coord_weights.resize(Ly);
    for (int b = 0; b < Ly; ++b) c.coord_weights(b) = g.col_width(b);
    return c;
}

double support_function(const SupportContext& ctx, const Eigen::MatrixXd& h,
                        const Eigen::VectorXd& pi_h) {
    if (h.cols() != ctx.atoms.cols())
        throw std::invalid_argument("support_function: direction dimension mismatch");
    if (h.rows() != pi_h.size())
        throw std::invalid_argument("support_function: pi dimension mismatch");
    // <h_k, atom>_w precomputed for all atoms at once.
    const Eigen::MatrixXd ip =
        ctx.atoms * ctx.coord_weights.asDiagonal() * h.transpose();  // n_atoms x K
    double acc = 0.0;
    for (Eigen::Index j = 0; j < ip.rows(); ++j) {
        double best = ip(j, 0) + pi_h(0);
        for (Eigen::Index k = 1; k < ip.cols(); ++k)
            best = std::max(best, ip(j, k) + pi_h(k));
        acc += ctx.atom_weights(j) * best;
    }
    return acc;
}

double hausdorff_estimate(const SupportContext& a, const SupportContext& b,
                          int K, int n_directions, std::uint64_t seed) {
    if (n_directions < 1)
        throw std::invalid_argument("hausdorff_estimate: need at least one direction");
    if (a.atoms.cols() != b.atoms.cols())
        throw std::invalid_argument("hausdorff_estimate: contexts live in different spaces");
    const int dim = static_cast<int>(a.atoms.cols());
    SplitRng rng(seed);

    double best = 0.0;
    auto probe = [&](const Eigen::MatrixXd& h, const Eigen::VectorXd& pi_h) {
        const double d = std::abs(support_function(a, h, pi_h) -
                                  support_function(b, h, pi_h));
        best = std::max(best, d);
    };

    // Signed coordinate axes, normalized in the weighted norm.
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(K, dim);
    Eigen::VectorXd pi_h = Eigen::VectorXd::Zero(K);
    for (int k = 0; k < K; ++k) {
        for (int i = 0; i < dim; ++i) {
            const double scale = 1.0 / std::sqrt(a.coord_weights(i));
            h(k, i) = scale;
            probe(h, pi_h);
            h(k, i) = -scale;
            probe(h, pi_h);
            h(k, i) = 0.0;
        }
        pi_h(k) = 1.0;
        probe(h, pi_h);
        pi_h(k) = -1.0;
        probe(h, pi_h);
        pi_h(k) = 0.0;
    }

    for (int t = 0; t < n_directions; ++t) {
        for (int k = 0; k < K; ++k)
            for (int i = 0; i < dim; ++i) h(k, i) = rng.next_gaussian();
        for (int k = 0; k < K; ++k) pi_h(k) = rng.next_gaussian();
        double nrm = pi_h.squaredNorm();
        for (int k = 0; k < K; ++k)
            nrm += h.row(k).cwiseProduct(h.row(k)).dot(a.coord_weights.transpose());
        nrm = std::sqrt(nrm);
        if (nrm <= 0.0) continue;
        probe(h / nrm, pi_h / nrm);
    }
    return best;
}

EpsilonCover epsilon_cover(int d, double eps) {
    if (d < 1) throw std::invalid_argument("epsilon_cover: d must be >= 1");
    if (!(eps > 0.0) || eps > 1.0)
        throw std::invalid_argument("epsilon_cover: epsilon must be in (0,1]");
    const int per_axis =
        std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d)) / eps)));
    const double h = 1.0 / per_axis;

    long total = 1;
    for (int i = 0; i < d; ++i) total *= per_axis;
    EpsilonCover cover;
    cover.epsilon = eps;
    cover.d = d;
    cover.points.resize(total, d);
    std::vector<int> idx(d, 0);
    for (long p = 0; p < total; ++p) {
        Eigen::VectorXd pt(d);
        for (int i = 0; i < d; ++i) pt(i) = (idx[i] + 0.5) * h;
        // Projection onto the unit ball; stays inside [0,1)^d.
        const double nrm = pt.norm();
        if (nrm > 1.0) pt /= nrm;
        cover.points.row(p) = pt.transpose();
        for (int i = 0; i < d; ++i) {
            if (++idx[i] < per_axis) break;
            idx[i] = 0;
        }
    }
    return cover;
}

QuantizedLatent quantize_latents_indexed(const GeneralLatent& latents,
                                         const EpsilonCover& cover) {
    if (latents.d != cover.d)
        throw std::invalid_argument("quantize_latents: dimension mismatch");
    QuantizedLatent out;
    out.latent = latents;
    out.cover_index.resize(latents.size());
    for (int i = 0; i < latents.size(); ++i) {
        int best = 0;
        double best_d = (latents.vectors.row(i) - cover.points.row(0)).squaredNorm();
        for (int p = 1; p < cover.size(); ++p) {
            const double dd = (latents.vectors.row(i) - cover.points.row(p)).squaredNorm();
            if (dd < best_d) {
                best_d = dd;
                best = p;
            }
        }
        out.latent.vectors.row(i) = cover.points.row(best);
        out.cover_index[i] = best;
    }
    return out;
}

GeneralLatent quantize_latents(const GeneralLatent& latents,
                               const EpsilonCover& cover) {
    return quantize_latents_indexed(latents, cover).latent;
}

Eigen::MatrixXd quantized_theta(const Theta& theta, const EpsilonCover& cover,
                                ModelFamily family) {
    const int K = static_cast<int>(theta.rows());
    const int nc = cover.size();
    Eigen::MatrixXd out(K * nc, K * nc);
    for (int u = 0; u < K; ++u)
        for (int c = 0; c < nc; ++c)
            for (int v = 0; v < K; ++v)
                for (int c2 = 0; c2 < nc; ++c2) {
                    const double dot = cover.points.row(c).dot(cover.points.row(c2));
                    double val = 0.0;
                    switch (family) {
                        case ModelFamily::Blockmodel: val = theta(u, v); break;
                        case ModelFamily::DotProduct: val = dot; break;
                        default: val = dot * theta(u, v); break;
                    }
                    out(u * nc + c, v * nc + c2) = val;
                }
    return out;
}

LatentDistribution latent_distribution(const GeneralLatent& latents) {
    LatentDistribution d;
    d.weights = Eigen::VectorXd::Constant(latents.size(), 1.0 / latents.size());
    d.labels = latents.labels;
    d.vectors = latents.vectors;
    d.K = latents.K;
    d.d = latents.d;
    return d;
}

LatentDistribution latent_distribution(const PopulationLatentMap& map) {
    LatentDistribution d;
    const int L = map.n_intervals();
    d.weights.resize(L);
    for (int i = 0; i < L; ++i) d.weights(i) = map.breaks[i + 1] - map.breaks[i];
    d.labels = map.labels;
    d.vectors = map.vectors;
    d.K = map.K;
    d.d = map.d;
    return d;
}

namespace {
double psi_at(const LatentDistribution& dist, int k, const Eigen::VectorXd& c) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < dist.weights.size(); ++j) {
        if (dist.labels[j] > k) continue;
        bool below = true;
        for (Eigen::Index i = 0; i < c.size() && below; ++i)
            if (dist.vectors(j, i) > c(i)) below = false;
        if (below) acc += dist.weights(j);
    }
    return acc;
}
}  // namespace

double psi_cdf_distance(const LatentDistribution& a, const LatentDistribution& b,
                        int grid_resolution) {
    if (a.K != b.K || a.d != b.d)
        throw std::invalid_argument("psi_cdf_distance: (K,d) mismatch");
    if (a.d > 3) throw std::invalid_argument("psi_cdf_distance: d must be <= 3");
    const int K = a.K;
    if (a.d == 0) {
        double acc = 0.0;
        for (int k = 0; k < K; ++k) {
            double pa = 0.0, pb = 0.0;
            for (Eigen::Index j = 0; j < a.weights.size(); ++j)
                if (a.labels[j] <= k) pa += a.weights(j);
            for (Eigen::Index j = 0; j < b.weights.size(); ++j)
                if (b.labels[j] <= k) pb += b.weights(j);
            acc += (pa - pb) * (pa - pb);
        }
        return acc;
    }
    if (grid_resolution < 8)
        throw std::invalid_argument("psi_cdf_distance: resolution must be >= 8");
    const int d = a.d;
    const int R = grid_resolution;
    long total = 1;
    for (int i = 0; i < d; ++i) total *= R;
    double acc = 0.0;
    std::vector<int> idx(d, 0);
    Eigen::VectorXd c(d);
    for (long p = 0; p < total; ++p) {
        for (int i = 0; i < d; ++i) c(i) = (idx[i] + 0.5) / R;
        for (int k = 0; k < K; ++k) {
            const double diff = psi_at(a, k, c) - psi_at(b, k, c);
            acc += diff * diff;
        }
        for (int i = 0; i < d; ++i) {
            if (++idx[i] < R) break;
            idx[i] = 0;
        }
    }
    return acc / total;
}

}  // namespace coblock
