// Acceptance suite: one pass/fail line per criterion. Exit status is the
// number of failed criteria. argv[1] (optional) is the CLI binary path,
// used by the determinism criterion.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include "coblock/bench.hpp"
#include "coblock/estimators.hpp"
#include "coblock/geometry.hpp"
#include "coblock/population.hpp"
#include "coblock/rng.hpp"
#include "oracles.hpp"

using namespace coblock;

namespace {

int g_jobs = std::max(2u, std::thread::hardware_concurrency());

std::vector<int> random_label_vec(int count, int K, std::mt19937_64& gen) {
    std::vector<int> v(count);
    for (auto& e : v) e = static_cast<int>(gen() % K);
    return v;
}

// ---- 1. Monte-Carlo oracle equivalence -------------------------------

bool criterion_oracles() {
    int pass_bg = 0, pass_mixed = 0, pass_risk = 0;
    const int mc = 1000000;
    for (int inst = 0; inst < 20; ++inst) {
        const StepGraphon g = oracles::random_step_graphon(3, 3, 9000 + inst);
        std::mt19937_64 gen(9100 + inst);
        std::uniform_real_distribution<double> unif(0.0, 1.0);

        Eigen::VectorXd row_lens(3), col_lens(3);
        for (int a = 0; a < 3; ++a) row_lens(a) = g.row_width(a);
        for (int b = 0; b < 3; ++b) col_lens(b) = g.col_width(b);
        const AllocationMap ra = oracles::random_allocation(row_lens, 2, gen);
        const AllocationMap ca = oracles::random_allocation(col_lens, 2, gen);
        const auto rp = realize_partition(ra);
        const auto cp = realize_partition(ca);
        auto label_of = [](const std::vector<PartitionPiece>& ps, double v) {
            for (const auto& p : ps)
                if (v >= p.lo && (v < p.hi || p.hi == 1.0)) return p.label;
            return ps.back().label;
        };

        // blocked_graphon entry (0,0)
        const BlockedGraphon bg = blocked_graphon(g, ra, ca);
        auto est = oracles::mc_integrate2d(
            [&](double x, double y) {
                return (label_of(rp, x) == 0 && label_of(cp, y) == 0) ? g.eval(x, y)
                                                                      : 0.0;
            },
            mc, 9200 + inst);
        if (std::abs(bg.phi(0, 0) - est.mean) <= 4.0 * est.stderr_) ++pass_bg;

        // blocked_graphon_mixed entry (0,0)
        const int m = 10;
        std::vector<double> x;
        for (int i = 0; i < m; ++i) x.push_back(unif(gen));
        const std::vector<int> S = random_label_vec(m, 2, gen);
        const Eigen::MatrixXd phi = blocked_graphon_mixed(g, x, S, 2, ca);
        est = oracles::mc_integrate1d(
            [&](double y) {
                if (label_of(cp, y) != 0) return 0.0;
                double acc = 0.0;
                for (int i = 0; i < m; ++i)
                    if (S[i] == 0) acc += g.eval(x[i], y);
                return acc / m;
            },
            mc, 9300 + inst);
        if (std::abs(phi(0, 0) - est.mean) <= 4.0 * est.stderr_) ++pass_mixed;

        // population_risk with random label maps and theta
        std::vector<int> rl(rp.size()), cl(cp.size());
        PopulationLatentMap sigma, tau;
        sigma.K = tau.K = 2;
        sigma.vectors.resize(static_cast<Eigen::Index>(rp.size()), 0);
        tau.vectors.resize(static_cast<Eigen::Index>(cp.size()), 0);
        sigma.breaks.push_back(0.0);
        for (const auto& p : rp) {
            sigma.breaks.push_back(p.hi);
            sigma.labels.push_back(p.label);
        }
        tau.breaks.push_back(0.0);
        for (const auto& p : cp) {
            tau.breaks.push_back(p.hi);
            tau.labels.push_back(p.label);
        }
        Eigen::MatrixXd theta(2, 2);
        theta << unif(gen), unif(gen), unif(gen), unif(gen);
        const double risk = population_risk(g, sigma, tau, theta, ModelFamily::Blockmodel);
        est = oracles::mc_integrate2d(
            [&](double xx, double yy) {
                const double k = theta(sigma.labels[sigma.interval_at(xx)],
                                       tau.labels[tau.interval_at(yy)]);
                const double diff = g.eval(xx, yy) - k;
                return diff * diff;
            },
            mc, 9400 + inst);
        if (std::abs(risk - est.mean) <= 4.0 * est.stderr_) ++pass_risk;
    }
    std::cout << "    blocked " << pass_bg << "/20, mixed " << pass_mixed
              << "/20, risk " << pass_risk << "/20\n";
    return pass_bg >= 19 && pass_mixed >= 19 && pass_risk >= 19;
}

// ---- 2. Block concentration rate -------------------------------------

bool criterion_concentration() {
    const ExperimentConfig cfg = parse_config(
        "n_grid = 100 200 400 800 1600\nK = 3\nreps = 3\nmaster_seed = 71\n");
    const RateResult res = run_lemma1_experiment(cfg, g_jobs);
    std::cout << "    slope " << format_g17(res.slope) << " (need <= -0.8)\n";
    return res.slope <= -0.8;
}

// ---- 3. Block estimation error rate -----------------------------------

bool criterion_th1_rate() {
    const ExperimentConfig cfg = parse_config(
        "n_grid = 100 200 400 800 1600\nK = 4\nreps = 20\nmaster_seed = 72\n");
    const RateResult res = run_theorem1_experiment(cfg, g_jobs);
    int inversions = 0;
    for (size_t i = 1; i < res.per_n_median.size(); ++i)
        if (res.per_n_median[i] > res.per_n_median[i - 1]) ++inversions;
    std::cout << "    slope " << format_g17(res.slope) << " (need <= -0.35), "
              << inversions << " inversions (need <= 1)\n";
    return res.slope <= -0.35 && inversions <= 1;
}

// ---- 4. Matching QP vs brute force ------------------------------------

bool criterion_qp() {
    for (int inst = 0; inst < 10; ++inst) {
        const StepGraphon g = oracles::random_step_graphon(2, 2, 9500 + inst);
        const BipartiteSample s = sample_bipartite(g, 25, 25, 9600 + inst);
        std::mt19937_64 gen(9700 + inst);
        const std::vector<int> T = random_label_vec(25, 2, gen);

        Eigen::MatrixXd ind = Eigen::MatrixXd::Zero(25, 2);
        for (int j = 0; j < 25; ++j) ind(j, T[j]) = 1.0;
        AllocationQP qp;
        const Eigen::MatrixXd gT = s.W * ind / 25.0;
        Eigen::VectorXd counts = Eigen::VectorXd::Zero(2);
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(2, 2);
        for (int i = 0; i < 25; ++i) {
            const int a = g.row_cell(s.x[i]);
            counts(a) += 1.0;
            h.row(a) += gT.row(i);
        }
        qp.C = g.values;
        qp.row_weight = counts / 25.0;
        qp.lin = h / 25.0;
        qp.pi_target = ind.colwise().sum().transpose() / 25.0;
        qp.budgets.resize(2);
        qp.budgets << g.col_width(0), g.col_width(1);
        qp.base = gT.squaredNorm() / 25.0;

        const MatchResult res = solve_allocation_qp(qp, 1e-8, 50000);
        const double brute = oracles::brute_force_qp_2x2(qp, 200);
        if (!res.converged || std::abs(res.objective - brute) > 1e-6) {
            std::cout << "    instance " << inst << ": objective "
                      << format_g17(res.objective) << " vs brute "
                      << format_g17(brute) << "\n";
            return false;
        }
        for (int r = 0; r < 1000; ++r) {
            const AllocationMap rnd = oracles::random_allocation(qp.budgets, 2, gen);
            if (res.objective > qp.value(rnd.mass) + 1e-12) {
                std::cout << "    instance " << inst
                          << ": beaten by a random allocation\n";
                return false;
            }
        }
    }
    return true;
}

// ---- 5. Quantization inequalities -------------------------------------

bool criterion_quantization() {
    const int res_grid = 16;
    for (int inst = 0; inst < 100; ++inst) {
        std::mt19937_64 gen(9800 + inst);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        const int K = 2, d = 1 + inst % 2, m = 40, n = 40;
        const double eps = 0.3 + 0.7 * unif(gen);
        const StepGraphon g = oracles::random_step_graphon(2, 2, 9900 + inst);
        const BipartiteSample s = sample_bipartite(g, m, n, 10000 + inst);

        GeneralLatent S, T;
        S.K = T.K = K;
        S.d = T.d = d;
        S.labels = random_label_vec(m, K, gen);
        T.labels = random_label_vec(n, K, gen);
        S.vectors.resize(m, d);
        T.vectors.resize(n, d);
        for (int i = 0; i < m; ++i) {
            Eigen::VectorXd v(d);
            for (int k = 0; k < d; ++k) v(k) = unif(gen);
            S.vectors.row(i) = project_to_domain(v).transpose();
        }
        for (int j = 0; j < n; ++j) {
            Eigen::VectorXd v(d);
            for (int k = 0; k < d; ++k) v(k) = unif(gen);
            T.vectors.row(j) = project_to_domain(v).transpose();
        }
        Eigen::MatrixXd theta(K, K);
        for (int u = 0; u < K; ++u)
            for (int v = 0; v < K; ++v) theta(u, v) = unif(gen);

        const EpsilonCover cover = epsilon_cover(d, eps);
        const GeneralLatent Sq = quantize_latents(S, cover);
        const GeneralLatent Tq = quantize_latents(T, cover);
        const double ra =
            empirical_risk(s.A, S, T, theta, ModelFamily::DotProductBlock);
        const double rq =
            empirical_risk(s.A, Sq, Tq, theta, ModelFamily::DotProductBlock);
        if (std::abs(ra - rq) > 12.0 * eps) {
            std::cout << "    instance " << inst << ": risk gap "
                      << format_g17(std::abs(ra - rq)) << " > 12 eps\n";
            return false;
        }
        const double psi =
            psi_cdf_distance(latent_distribution(S), latent_distribution(Sq), res_grid);
        if (psi > K * d * eps + 2.0 * K * d / res_grid) {
            std::cout << "    instance " << inst << ": Psi gap "
                      << format_g17(psi) << " > Kd eps + slack\n";
            return false;
        }
    }
    return true;
}

// ---- 6. Centering identity ---------------------------------------------

bool criterion_centering() {
    double worst = 0.0;
    for (int inst = 0; inst < 50; ++inst) {
        std::mt19937_64 gen(10100 + inst);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        const StepGraphon g = oracles::random_step_graphon(3, 3, 10200 + inst);
        const BipartiteSample s = sample_bipartite(g, 30, 30, 10300 + inst);
        const CenteringConstants c = centering_constants(s, g);
        const int K = 2;
        double resid;
        if (inst % 2 == 0) {
            // Family 1: the kernel is block-constant as-is.
            CoClusterLabels lab;
            lab.K = K;
            lab.S = random_label_vec(30, K, gen);
            lab.T = random_label_vec(30, K, gen);
            Eigen::MatrixXd theta(K, K);
            theta << unif(gen), unif(gen), unif(gen), unif(gen);
            const GeneralLatent S = latent_from_labels(lab.S, K);
            const GeneralLatent T = latent_from_labels(lab.T, K);
            const double ra = empirical_risk(s.A, S, T, theta, ModelFamily::Blockmodel);
            const double rw = empirical_risk(s.W, S, T, theta, ModelFamily::Blockmodel);
            const double cross = ((block_summary(s.A, lab).phi -
                                   block_summary(s.W, lab).phi)
                                      .cwiseProduct(theta))
                                     .sum();
            resid = std::abs(ra - rw - c.c1 + 2.0 * cross);
        } else {
            // Family 4 after quantization: constant on quantized classes.
            const int d = 2;
            const EpsilonCover cover = epsilon_cover(d, 0.6);
            const int nc = cover.size();
            GeneralLatent S, T;
            S.K = T.K = K;
            S.d = T.d = d;
            S.labels = random_label_vec(30, K, gen);
            T.labels = random_label_vec(30, K, gen);
            S.vectors.resize(30, d);
            T.vectors.resize(30, d);
            for (int i = 0; i < 30; ++i) {
                Eigen::VectorXd v(d);
                for (int k = 0; k < d; ++k) v(k) = unif(gen);
                S.vectors.row(i) = project_to_domain(v).transpose();
                for (int k = 0; k < d; ++k) v(k) = unif(gen);
                T.vectors.row(i) = project_to_domain(v).transpose();
            }
            Eigen::MatrixXd theta(K, K);
            theta << unif(gen), unif(gen), unif(gen), unif(gen);

            const QuantizedLatent Sq = quantize_latents_indexed(S, cover);
            const QuantizedLatent Tq = quantize_latents_indexed(T, cover);
            CoClusterLabels qlab;
            qlab.K = K * nc;
            for (int i = 0; i < 30; ++i)
                qlab.S.push_back(Sq.latent.labels[i] * nc + Sq.cover_index[i]);
            for (int j = 0; j < 30; ++j)
                qlab.T.push_back(Tq.latent.labels[j] * nc + Tq.cover_index[j]);
            const Eigen::MatrixXd tbar =
                quantized_theta(theta, cover, ModelFamily::DotProductBlock);
            const double ra =
                empirical_risk(s.A, Sq.latent, Tq.latent, theta,
                               ModelFamily::DotProductBlock);
            const double rw =
                empirical_risk(s.W, Sq.latent, Tq.latent, theta,
                               ModelFamily::DotProductBlock);
            const double cross = ((block_summary(s.A, qlab).phi -
                                   block_summary(s.W, qlab).phi)
                                      .cwiseProduct(tbar))
                                     .sum();
            resid = std::abs(ra - rw - c.c1 + 2.0 * cross);
        }
        worst = std::max(worst, resid);
    }
    std::cout << "    worst residual " << format_g17(worst) << " (need <= 1e-10)\n";
    return worst <= 1e-10;
}

// ---- 7. Centered risk-gap rates ----------------------------------------

bool criterion_th2() {
    const ExperimentConfig c0 = parse_config(
        "n_grid = 100 200 400 800 1600\nK = 2\nreps = 10\nmaster_seed = 73\n"
        "family = 1\nd = 0\n");
    const ExperimentConfig c2 = parse_config(
        "n_grid = 100 200 400 800 1600\nK = 2\nreps = 10\nmaster_seed = 73\n"
        "family = 4\nd = 2\n");
    const RateResult r0 = run_theorem2_experiment(c0, g_jobs);
    const RateResult r2 = run_theorem2_experiment(c2, g_jobs);
    std::cout << "    d=0 slope " << format_g17(r0.slope) << " (need <= -0.15), d=2 slope "
              << format_g17(r2.slope) << " (need > d=0 slope)\n";
    return r0.slope <= -0.15 && r2.slope > r0.slope;
}

// ---- 8. Estimator sanity ------------------------------------------------

bool criterion_estimators() {
    Eigen::MatrixXd theta(3, 3);
    theta << 0.9, 0.1, 0.5, 0.1, 0.8, 0.3, 0.5, 0.3, 0.2;
    const int m = 90, n = 90;
    std::vector<int> S(m), T(n);
    Eigen::MatrixXd W(m, n);
    for (int i = 0; i < m; ++i) S[i] = (i * 3) / m;
    for (int j = 0; j < n; ++j) T[j] = (j * 3) / n;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) W(i, j) = theta(S[i], T[j]);
    const CoClusterLabels rec = spectral_cocluster(W, 3, 55);
    if (!oracles::same_up_to_permutation(S, rec.S, 3) ||
        !oracles::same_up_to_permutation(T, rec.T, 3)) {
        std::cout << "    spectral recovery failed on the planted blockmodel\n";
        return false;
    }

    const StepGraphon g = blockmodel_graphon(theta);
    auto monotone = [](const std::vector<double>& tr) {
        for (size_t i = 1; i < tr.size(); ++i)
            if (tr[i] > tr[i - 1] + 1e-12) return false;
        return true;
    };
    for (std::uint64_t seed : {101ull, 102ull, 103ull}) {
        const BipartiteSample s = sample_bipartite(g, 80, 80, seed);
        const CoClusterLabels init = spectral_cocluster(s.A, 3, seed);
        if (!monotone(fit_blockmodel_als(s.A, 3, init, 30).risk_trace)) {
            std::cout << "    blockmodel trace not monotone (seed " << seed << ")\n";
            return false;
        }
        if (!monotone(fit_dot_product_model(s.A, 3, 1, ModelFamily::DegreeCorrected,
                                            seed, 15)
                          .risk_trace) ||
            !monotone(fit_dot_product_model(s.A, 1, 2, ModelFamily::DotProduct, seed, 15)
                          .risk_trace) ||
            !monotone(fit_dot_product_model(s.A, 3, 2, ModelFamily::DotProductBlock,
                                            seed, 15)
                          .risk_trace)) {
            std::cout << "    a dot-product trace not monotone (seed " << seed << ")\n";
            return false;
        }
    }
    return true;
}

// ---- 9. CLI determinism ---------------------------------------------------

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

bool criterion_determinism(const std::string& cli) {
    if (cli.empty()) {
        std::cout << "    no CLI path given\n";
        return false;
    }
    const std::filesystem::path base =
        std::filesystem::temp_directory_path() / "coblock_acceptance";
    std::filesystem::remove_all(base);
    std::filesystem::create_directories(base);
    const std::filesystem::path cfg = base / "cfg.txt";
    {
        std::ofstream out(cfg);
        out << "n_grid = 100 200 400\nK = 3\nreps = 3\n";
    }
    auto run = [&](const std::string& extra, const std::string& out_dir) {
        const std::string cmd = "\"" + cli + "\" --config " + cfg.string() +
                                " --seed 77 --out " + (base / out_dir).string() +
                                " " + extra + " verify-th1 > /dev/null";
        return std::system(cmd.c_str()) == 0;
    };
    if (!run("", "a") || !run("", "b") || !run("--jobs 8", "c")) {
        std::cout << "    CLI invocation failed\n";
        return false;
    }
    const std::string a = slurp(base / "a" / "results.csv");
    const std::string b = slurp(base / "b" / "results.csv");
    const std::string c = slurp(base / "c" / "results.csv");
    std::filesystem::remove_all(base);
    if (a.empty() || a != b) {
        std::cout << "    repeat run differs\n";
        return false;
    }
    if (a != c) {
        std::cout << "    parallel run differs\n";
        return false;
    }
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    const std::string cli = argc > 1 ? argv[1] : "";
    struct Criterion {
        const char* name;
        std::function<bool()> fn;
    };
    const std::vector<Criterion> criteria{
        {"1 oracle equivalence (Monte-Carlo, 4 SE)", criterion_oracles},
        {"2 block concentration slope <= -0.8", criterion_concentration},
        {"3 estimation-error slope <= -0.35, medians near-monotone", criterion_th1_rate},
        {"4 matching QP matches brute force, dominates random", criterion_qp},
        {"5 quantization inequalities (12 eps, Kd eps + slack)", criterion_quantization},
        {"6 centering identity residual <= 1e-10", criterion_centering},
        {"7 centered risk-gap slopes (d=0 vs d=2)", criterion_th2},
        {"8 estimator sanity (exact recovery, monotone traces)", criterion_estimators},
        {"9 CLI determinism (repeat + parallel byte-identical)",
         [&] { return criterion_determinism(cli); }},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        bool ok = false;
        try {
            ok = c.fn();
        } catch (const std::exception& e) {
            std::cout << "    exception: " << e.what() << "\n";
        }
        std::cout << (ok ? "PASS" : "FAIL") << " criterion " << c.name << "\n";
        if (!ok) ++failures;
    }
    return failures;
}
